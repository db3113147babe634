#include "polycode/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <queue>
#include <thread>
#include <tuple>

namespace polycode {

void SpeedModel::validate() const {
  if (!(nu > 0.0)) throw std::invalid_argument("SpeedModel: nu must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("SpeedModel: lambda must be positive");
}

double sample_worker_speed(const SpeedModel& model, std::mt19937_64& rng) {
  std::exponential_distribution<double> tail(model.lambda);
  return model.nu + tail(rng);
}

double completion_cdf(const SpeedModel& model, int p, double t) {
  if (p <= 0) return 1.0;
  if (t < p * model.nu) return 0.0;
  return 1.0 - std::exp(-model.lambda * (t / p - model.nu));
}

StopRule::StopRule(const SchemeConfig& cfg, bool optimistic)
    : cfg_(&cfg),
      optimistic_(optimistic && (cfg.scheme == Scheme::BPC_NZO || cfg.scheme == Scheme::BPC_ZZO)),
      fixed_(fixed_stop_count(cfg)),
      per_worker_(static_cast<std::size_t>(cfg.workers), 0) {
  if (cfg.scheme == Scheme::B_PROC) {
    const Storage st = cfg.storage.front();
    grid_.emplace(cfg.n_a * st.m_a, cfg.n_b * st.m_b);
  }
}

std::int64_t StopRule::required() const {
  return fixed_ ? *fixed_ : recovery_threshold(*cfg_);
}

std::pair<int, int> StopRule::grid_cell(int worker, Cell cell) const {
  const Storage st = cfg_->storage.front();
  const int a = worker / cfg_->n_b;
  const int b = worker % cfg_->n_b;
  return {a * st.m_a + cell.k, b * st.m_b + cell.l};
}

bool StopRule::on_arrival(int worker, Cell cell) {
  if (done_) return true;
  ++arrivals_;
  ++per_worker_[static_cast<std::size_t>(worker)];
  const int K = cfg_->K();
  const int L = cfg_->L();
  if (grid_) {
    const auto [col, row] = grid_cell(worker, cell);
    grid_->receive(col, row, K, L);
    done_ = grid_->decodable(K);
  } else if (optimistic_) {
    if (arrivals_ >= K * L) {
      std::vector<DerivativeSet> sets;
      sets.reserve(per_worker_.size());
      for (int n : per_worker_) {
        // only the sizes matter to the discard policy
        sets.push_back({{}, std::vector<Cell>(static_cast<std::size_t>(n))});
      }
      done_ = select_responses(sets, cfg_->scheme, K, L, cfg_->mu_a, cfg_->mu_b).complete;
    }
  } else {
    done_ = arrivals_ >= *fixed_;
  }
  return done_;
}

SimOutcome simulate(const SchemeConfig& cfg, std::span<const double> durations,
                    const std::vector<std::vector<Cell>>& orders, bool optimistic) {
  const int N = cfg.workers;
  if (durations.size() != static_cast<std::size_t>(N) || orders.size() != static_cast<std::size_t>(N)) {
    throw std::invalid_argument("simulate: one duration and one order per worker");
  }
  const int KL = cfg.K() * cfg.L();
  StopRule rule(cfg, optimistic);
  std::int64_t capacity = 0;
  for (const auto& o : orders) capacity += static_cast<std::int64_t>(o.size());
  if (auto fixed = fixed_stop_count(cfg); fixed && capacity < *fixed) {
    throw CapacityError("workers can deliver " + std::to_string(capacity) + " computations, " +
                        std::to_string(*fixed) + " required");
  }

  using Event = std::tuple<double, int, int>;  // time, worker, sequence
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  for (int w = 0; w < N; ++w) {
    if (!orders[static_cast<std::size_t>(w)].empty()) events.emplace(durations[static_cast<std::size_t>(w)], w, 0);
  }
  std::vector<int> delivered(static_cast<std::size_t>(N), 0);
  SimOutcome out;
  while (!events.empty()) {
    const auto [t, w, seq] = events.top();
    events.pop();
    const auto& order = orders[static_cast<std::size_t>(w)];
    ++delivered[static_cast<std::size_t>(w)];
    if (rule.on_arrival(w, order[static_cast<std::size_t>(seq)])) {
      out.completion_time = t;
      out.stopping_worker = w;
      break;
    }
    if (seq + 1 < static_cast<int>(order.size())) {
      events.emplace(static_cast<double>(seq + 2) * durations[static_cast<std::size_t>(w)], w, seq + 1);
    }
  }
  if (!rule.done()) {
    throw CapacityError("all computations delivered without reaching decodability");
  }
  out.arrivals = rule.arrivals();
  out.used = KL;
  out.discarded = out.arrivals - KL;
  for (int w = 0; w < N; ++w) {
    if (w != out.stopping_worker &&
        delivered[static_cast<std::size_t>(w)] < static_cast<int>(orders[static_cast<std::size_t>(w)].size())) {
      ++out.ongoing_at_stop;
    }
  }
  out.realized_wasted_fraction = static_cast<double>(out.discarded + out.ongoing_at_stop) / KL;
  return out;
}

SimOutcome run_trial(const SchemeConfig& cfg, const SpeedModel& model, std::uint64_t seed,
                     bool optimistic) {
  std::mt19937_64 rng(seed);
  std::vector<double> durations(static_cast<std::size_t>(cfg.workers));
  for (auto& d : durations) d = sample_worker_speed(model, rng);
  std::vector<std::vector<Cell>> orders;
  orders.reserve(durations.size());
  for (int w = 0; w < cfg.workers; ++w) orders.push_back(computation_order(cfg, w, &rng));
  return simulate(cfg, durations, orders, optimistic);
}

MonteCarloResult monte_carlo(const SchemeConfig& cfg, const SpeedModel& model, int trials,
                             std::uint64_t seed, int threads, bool optimistic) {
  if (trials < 1) throw std::invalid_argument("monte_carlo: trials must be >= 1");
  validate(cfg);
  model.validate();
  std::vector<double> times(static_cast<std::size_t>(trials));
  std::vector<double> wasted(static_cast<std::size_t>(trials));
  auto run = [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      const SimOutcome o = run_trial(cfg, model, derive_seed(seed, static_cast<std::uint64_t>(t)), optimistic);
      times[static_cast<std::size_t>(t)] = o.completion_time;
      wasted[static_cast<std::size_t>(t)] = o.realized_wasted_fraction;
    }
  };
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, trials);
  if (threads == 1) {
    run(0, trials);
  } else {
    std::vector<std::future<void>> jobs;
    for (int c = 0; c < threads; ++c) {
      jobs.push_back(std::async(std::launch::async, run, trials * c / threads, trials * (c + 1) / threads));
    }
    for (auto& j : jobs) j.get();
  }
  // fixed summation order keeps estimates bit-identical across thread counts
  MonteCarloResult res;
  res.trials = trials;
  double sum = 0.0;
  double sum_w = 0.0;
  for (int t = 0; t < trials; ++t) {
    sum += times[static_cast<std::size_t>(t)];
    sum_w += wasted[static_cast<std::size_t>(t)];
  }
  res.mean_time = sum / trials;
  res.mean_wasted = sum_w / trials;
  if (trials > 1) {
    double ss = 0.0;
    for (double v : times) ss += (v - res.mean_time) * (v - res.mean_time);
    res.ci_half_width = 1.96 * std::sqrt(ss / (trials - 1)) / std::sqrt(static_cast<double>(trials));
  }
  return res;
}

}  // namespace polycode
