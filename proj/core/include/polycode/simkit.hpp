#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "polycode/interp.hpp"
#include "polycode/schemes.hpp"

namespace polycode {

/// Shifted-exponential worker speed: each computation of a worker takes
/// nu + E time units with E ~ Exp(lambda) drawn once per worker per trial.
struct SpeedModel {
  double nu = 0.01;
  double lambda = 0.1;

  void validate() const;
};

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double sample_worker_speed(const SpeedModel& model, std::mt19937_64& rng);

/// P(worker finished at least p computations by time t).
double completion_cdf(const SpeedModel& model, int p, double t);

struct SimOutcome {
  double completion_time = 0.0;
  int arrivals = 0;
  int used = 0;
  int discarded = 0;
  int ongoing_at_stop = 0;
  int stopping_worker = -1;
  double realized_wasted_fraction = 0.0;
};

/// Master-side stop decision shared by the simulator and the executor.
///
/// UPC, UPC-PC, BPC-VO/HO and LOWER-BOUND stop at the KL-th arrival,
/// BPC-NZO/ZZO at the worst-case threshold, B-PROC as soon as peeling the
/// received grid succeeds. With `optimistic` set, NZO/ZZO instead stop once
/// the greedy discard selection over the received derivative sets already
/// retains KL computations.
class StopRule {
 public:
  explicit StopRule(const SchemeConfig& cfg, bool optimistic = false);

  /// Registers one arrival; true once the master can decode.
  bool on_arrival(int worker, Cell cell);

  bool done() const { return done_; }
  int arrivals() const { return arrivals_; }
  /// Arrivals the master would actually have to collect in the worst case.
  std::int64_t required() const;

  /// B-PROC grid coordinates of worker w's cell.
  std::pair<int, int> grid_cell(int worker, Cell cell) const;

 private:
  const SchemeConfig* cfg_;
  bool optimistic_;
  std::optional<std::int64_t> fixed_;
  std::optional<GridState> grid_;
  std::vector<int> per_worker_;
  int arrivals_ = 0;
  bool done_ = false;
};

/// Event-driven replay for given per-computation durations and orders.
/// Arrivals are ordered by (time, worker, sequence).
SimOutcome simulate(const SchemeConfig& cfg, std::span<const double> durations,
                    const std::vector<std::vector<Cell>>& orders, bool optimistic = false);

SimOutcome run_trial(const SchemeConfig& cfg, const SpeedModel& model, std::uint64_t seed,
                     bool optimistic = false);

struct MonteCarloResult {
  int trials = 0;
  double mean_time = 0.0;
  double ci_half_width = 0.0;  // 95% normal interval
  double mean_wasted = 0.0;
};

/// Trial t uses derive_seed(seed, t); results do not depend on `threads`.
MonteCarloResult monte_carlo(const SchemeConfig& cfg, const SpeedModel& model, int trials,
                             std::uint64_t seed, int threads = 0, bool optimistic = false);

}  // namespace polycode
