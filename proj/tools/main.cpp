#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "experiment.hpp"

using namespace polycode;
using namespace polycode::cli;

namespace {

struct Overrides {
  std::string config_path;
  std::string output;
  std::uint64_t seed = 0;
  int trials = 0;
  int threads = -1;
  int workers = 0;
  int ratio = 0;
  std::vector<std::string> schemes;
  std::vector<std::int64_t> budgets;
  std::int64_t budget = 0;
  std::string profile;
  double seconds_per_unit = -1.0;
  bool optimistic = false;
  bool duplicate_points = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed (default: $CODEDMM_SEED or 1)");
  cmd->add_option("--threads", o.threads, "worker threads, 0 = hardware concurrency");
  cmd->add_option("--workers", o.workers, "number of workers N");
  cmd->add_option("--scheme", o.schemes, "scheme name, repeatable");
}

bool given(const CLI::App* cmd, const std::string& name) {
  const CLI::Option* opt = cmd->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

// flags > file > defaults
ExperimentConfig resolve(const Overrides& o, ExperimentConfig base, const CLI::App* cmd) {
  ExperimentConfig cfg = o.config_path.empty() ? std::move(base) : [&] {
    std::ifstream in(o.config_path, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
      apply_json(base, text);
    } catch (const ConfigParseError& e) {
      throw ConfigParseError(o.config_path + ": " + e.what());
    }
    return base;
  }();
  if (given(cmd, "--seed")) cfg.seed = o.seed;
  if (given(cmd, "--trials")) cfg.trials = o.trials;
  if (given(cmd, "--threads")) cfg.threads = o.threads;
  if (given(cmd, "--workers")) cfg.workers = o.workers;
  if (given(cmd, "--partition-ratio")) cfg.partition_ratio = o.ratio;
  if (given(cmd, "--budgets")) cfg.budgets = o.budgets;
  if (given(cmd, "--budget")) cfg.budget = o.budget;
  if (given(cmd, "--profile")) cfg.profile_kind = o.profile;
  if (given(cmd, "--seconds-per-unit")) cfg.seconds_per_unit = o.seconds_per_unit;
  if (o.optimistic) cfg.optimistic = true;
  if (o.duplicate_points) cfg.duplicate_points = true;
  if (!o.schemes.empty()) {
    cfg.schemes.clear();
    for (const auto& s : o.schemes) cfg.schemes.push_back(parse_scheme(s));
  }
  validate(cfg);
  return cfg;
}

template <typename Fn>
int with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return 0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot open output '" << path << "'\n";
    return 1;
  }
  fn(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coded distributed matrix multiplication toolkit"};
  app.require_subcommand(1);
  Overrides o;

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo completion times over storage budgets (CSV)");
  add_common(sweep, o);
  sweep->add_option("-o,--output", o.output, "CSV path, '-' for stdout");
  sweep->add_option("--trials", o.trials, "Monte Carlo trials per point");
  sweep->add_option("--budgets", o.budgets, "storage budgets in A-partition units");
  sweep->add_option("--partition-ratio", o.ratio, "B-partition size over A-partition size");
  sweep->add_flag("--optimistic", o.optimistic, "NZO/ZZO stop once the discard selection completes");

  auto* reg = app.add_subcommand("verify-regularity", "Empirical nonsingularity of interpolation matrices");
  add_common(reg, o);
  reg->add_option("-o,--output", o.output, "CSV path, '-' for stdout");
  reg->add_option("--profile", o.profile, "conforming | violating | grid");

  auto* demo = app.add_subcommand("demo-exec", "Run the in-process executor on random matrices");
  add_common(demo, o);
  demo->add_option("--budget", o.budget, "storage budget (default: smallest feasible)");
  demo->add_option("--seconds-per-unit", o.seconds_per_unit, "wall-clock seconds per model time unit");
  demo->add_flag("--duplicate-points", o.duplicate_points, "give every worker the same evaluation point");

  auto* met = app.add_subcommand("metrics", "Storage metrics per scheme and budget (CSV)");
  add_common(met, o);
  met->add_option("-o,--output", o.output, "CSV path, '-' for stdout");
  met->add_option("--budgets", o.budgets, "storage budgets in A-partition units");
  met->add_option("--partition-ratio", o.ratio, "B-partition size over A-partition size");

  CLI11_PARSE(app, argc, argv);

  ExperimentConfig defaults;
  defaults.seed = default_seed();
  try {
    if (*sweep) {
      const auto cfg = resolve(o, defaults, sweep);
      return with_output(o.output, [&](std::ostream& out) { cmd_sweep(cfg, out); });
    }
    if (*reg) {
      ExperimentConfig base = defaults;
      base.plan = PartitionPlan{4, 1, 4, 4, 4};
      base.schemes = {Scheme::BPC_VO, Scheme::BPC_HO};
      const auto cfg = resolve(o, base, reg);
      return with_output(o.output, [&](std::ostream& out) { cmd_verify_regularity(cfg, out); });
    }
    if (*demo) {
      const auto cfg = resolve(o, demo_defaults(), demo);
      return cmd_demo_exec(cfg, std::cout, std::cerr);
    }
    if (*met) {
      const auto cfg = resolve(o, defaults, met);
      return with_output(o.output, [&](std::ostream& out) { cmd_metrics(cfg, out); });
    }
  } catch (const ConfigParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
