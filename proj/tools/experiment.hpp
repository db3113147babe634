#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "polycode/matrix.hpp"
#include "polycode/schemes.hpp"
#include "polycode/simkit.hpp"

namespace polycode::cli {

/// Thrown for malformed config files; the message names the line/column or
/// the offending field.
class ConfigParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  PartitionPlan plan{10, 10, 10, 10, 10};
  int workers = 15;
  std::vector<Scheme> schemes{Scheme::UPC,     Scheme::UPC_PC,  Scheme::B_PROC,     Scheme::BPC_VO,
                              Scheme::BPC_HO,  Scheme::BPC_NZO, Scheme::BPC_ZZO,    Scheme::LOWER_BOUND};
  std::vector<std::int64_t> budgets{6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  SpeedModel model;
  int trials = 10000;
  std::uint64_t seed = 1;
  int n_a = 0;  // B-PROC grid factors; 0 = chosen by the allocator
  int n_b = 0;
  int mu_a = 5;
  int mu_b = 5;
  int partition_ratio = 1;  // (c/L) / (r/K)
  int threads = 0;
  bool optimistic = false;

  // verify-regularity
  int profiles = 200;
  int draws = 50;
  std::string profile_kind = "conforming";  // conforming | violating | grid

  // demo-exec
  std::int64_t budget = 0;      // 0 = smallest feasible budget
  double seconds_per_unit = 0.0;
  bool duplicate_points = false;

  /// Plan used for storage costs: one A-partition costs 1, one B-partition
  /// costs partition_ratio.
  PartitionPlan cost_plan() const;
};

/// Default seed: $CODEDMM_SEED when set and numeric, otherwise 1.
std::uint64_t default_seed();

/// Overlays a JSON document onto `cfg`. Unknown keys are rejected.
void apply_json(ExperimentConfig& cfg, const std::string& text);

ExperimentConfig load_config(const std::string& path);

void validate(const ExperimentConfig& cfg);

}  // namespace polycode::cli
