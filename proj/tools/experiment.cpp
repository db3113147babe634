#include "experiment.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace polycode::cli {

using nlohmann::json;

namespace {

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigParseError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigParseError(where + ": unknown field '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigParseError(where + "." + key + ": " + e.what());
  }
}

}  // namespace

PartitionPlan ExperimentConfig::cost_plan() const {
  return PartitionPlan{plan.K, 1, plan.L * static_cast<std::size_t>(partition_ratio), plan.K, plan.L};
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("CODEDMM_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return v;
  }
  return 1;
}

void apply_json(ExperimentConfig& cfg, const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigParseError("config parse error at " + line_col(text, e.byte == 0 ? 0 : e.byte - 1) +
                           ": " + e.what());
  }
  check_keys(doc, "config",
             {"plan", "workers", "schemes", "budgets", "model", "trials", "seed", "bproc", "mu_a", "mu_b",
              "partition_ratio", "threads", "optimistic", "regularity", "demo"});

  if (auto it = doc.find("plan"); it != doc.end()) {
    check_keys(*it, "plan", {"K", "L", "r", "s", "c"});
    read(*it, "K", "plan", cfg.plan.K);
    read(*it, "L", "plan", cfg.plan.L);
    read(*it, "r", "plan", cfg.plan.r);
    read(*it, "s", "plan", cfg.plan.s);
    read(*it, "c", "plan", cfg.plan.c);
  }
  read(doc, "workers", "config", cfg.workers);
  if (auto it = doc.find("schemes"); it != doc.end()) {
    std::vector<std::string> names;
    read(doc, "schemes", "config", names);
    cfg.schemes.clear();
    for (const auto& n : names) {
      try {
        cfg.schemes.push_back(parse_scheme(n));
      } catch (const std::exception& e) {
        throw ConfigParseError(std::string("config.schemes: ") + e.what());
      }
    }
  }
  read(doc, "budgets", "config", cfg.budgets);
  if (auto it = doc.find("model"); it != doc.end()) {
    check_keys(*it, "model", {"nu", "lambda"});
    read(*it, "nu", "model", cfg.model.nu);
    read(*it, "lambda", "model", cfg.model.lambda);
  }
  read(doc, "trials", "config", cfg.trials);
  read(doc, "seed", "config", cfg.seed);
  if (auto it = doc.find("bproc"); it != doc.end()) {
    check_keys(*it, "bproc", {"n_a", "n_b"});
    read(*it, "n_a", "bproc", cfg.n_a);
    read(*it, "n_b", "bproc", cfg.n_b);
  }
  read(doc, "mu_a", "config", cfg.mu_a);
  read(doc, "mu_b", "config", cfg.mu_b);
  read(doc, "partition_ratio", "config", cfg.partition_ratio);
  read(doc, "threads", "config", cfg.threads);
  read(doc, "optimistic", "config", cfg.optimistic);
  if (auto it = doc.find("regularity"); it != doc.end()) {
    check_keys(*it, "regularity", {"profiles", "draws", "profile"});
    read(*it, "profiles", "regularity", cfg.profiles);
    read(*it, "draws", "regularity", cfg.draws);
    read(*it, "profile", "regularity", cfg.profile_kind);
  }
  if (auto it = doc.find("demo"); it != doc.end()) {
    check_keys(*it, "demo", {"budget", "seconds_per_unit", "duplicate_points"});
    read(*it, "budget", "demo", cfg.budget);
    read(*it, "seconds_per_unit", "demo", cfg.seconds_per_unit);
    read(*it, "duplicate_points", "demo", cfg.duplicate_points);
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigParseError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg;
  cfg.seed = default_seed();
  try {
    apply_json(cfg, ss.str());
  } catch (const ConfigParseError& e) {
    throw ConfigParseError(path + ": " + e.what());
  }
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  try {
    cfg.plan.validate();
  } catch (const std::exception& e) {
    throw ConfigParseError(std::string("plan: ") + e.what());
  }
  if (cfg.workers < 1) throw ConfigParseError("workers: must be >= 1");
  if (cfg.trials < 1) throw ConfigParseError("trials: must be >= 1");
  if (cfg.partition_ratio < 1) throw ConfigParseError("partition_ratio: must be a positive integer");
  if ((cfg.n_a == 0) != (cfg.n_b == 0)) throw ConfigParseError("bproc: set both n_a and n_b or neither");
  if (cfg.profile_kind != "conforming" && cfg.profile_kind != "violating" && cfg.profile_kind != "grid") {
    throw ConfigParseError("regularity.profile: expected conforming, violating or grid");
  }
  try {
    cfg.model.validate();
  } catch (const std::exception& e) {
    throw ConfigParseError(std::string("model: ") + e.what());
  }
}

}  // namespace polycode::cli
