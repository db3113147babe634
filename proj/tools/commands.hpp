#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "experiment.hpp"

namespace polycode::cli {

/// Fixed-notation decimal with '.' separator regardless of locale.
std::string format_fixed(double v, int precision);

/// One sweep point after allocation; `feasible` is false when the budget
/// admits no storage split or the workers cannot reach the stop count.
struct SweepPoint {
  Scheme scheme{};
  std::int64_t budget = 0;
  bool feasible = false;
  std::optional<SchemeConfig> config;
  int eta = 0;
  std::int64_t r_th = 0;
  std::string reason;
};

SweepPoint plan_point(const ExperimentConfig& cfg, Scheme scheme, std::int64_t budget);

/// Writes the sweep CSV: scheme,budget,feasible,mean_time,ci,mean_wasted,m_A,m_B,eta,R_th.
void cmd_sweep(const ExperimentConfig& cfg, std::ostream& out);

/// CSV of profile,trials,nonsingular_fraction,min_ratio per scheme.
void cmd_verify_regularity(const ExperimentConfig& cfg, std::ostream& out);

/// Runs the executor for each configured scheme; returns the process exit code.
int cmd_demo_exec(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

/// Per-worker storage metrics for every (scheme, budget) as exact fractions.
void cmd_metrics(const ExperimentConfig& cfg, std::ostream& out);

/// Base configuration for demo-exec: a small plan the guard accepts.
ExperimentConfig demo_defaults();

}  // namespace polycode::cli
