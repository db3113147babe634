#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "commands.hpp"
#include "experiment.hpp"

using namespace polycode;
using namespace polycode::cli;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

ExperimentConfig small_sweep() {
  ExperimentConfig cfg;
  cfg.schemes = {Scheme::BPC_NZO, Scheme::B_PROC, Scheme::UPC_PC, Scheme::LOWER_BOUND};
  cfg.budgets = {6, 10, 14};
  cfg.trials = 200;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST(Config, OverlayAndDefaults) {
  ExperimentConfig cfg;
  apply_json(cfg, R"({"plan": {"K": 4, "L": 6, "r": 8, "s": 3, "c": 12},
                      "schemes": ["BPC-HO", "B-PROC"], "model": {"lambda": 0.5},
                      "bproc": {"n_a": 3, "n_b": 5}, "trials": 7})");
  EXPECT_EQ(cfg.plan.K, 4u);
  EXPECT_EQ(cfg.plan.c, 12u);
  EXPECT_EQ(cfg.schemes.size(), 2u);
  EXPECT_EQ(cfg.model.lambda, 0.5);
  EXPECT_EQ(cfg.model.nu, 0.01);
  EXPECT_EQ(cfg.n_b, 5);
  EXPECT_EQ(cfg.trials, 7);
  EXPECT_EQ(cfg.workers, 15);
}

TEST(Config, SyntaxErrorReportsLine) {
  ExperimentConfig cfg;
  try {
    apply_json(cfg, "{\n  \"workers\": 4,\n  \"trials\": ,\n}");
    FAIL() << "expected a parse error";
  } catch (const ConfigParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Config, FieldErrorsNameTheField) {
  ExperimentConfig cfg;
  try {
    apply_json(cfg, R"({"model": {"nu": "fast"}})");
    FAIL();
  } catch (const ConfigParseError& e) {
    EXPECT_NE(std::string(e.what()).find("model.nu"), std::string::npos) << e.what();
  }
  try {
    apply_json(cfg, R"({"plan": {"KK": 2}})");
    FAIL();
  } catch (const ConfigParseError& e) {
    EXPECT_NE(std::string(e.what()).find("'KK'"), std::string::npos) << e.what();
  }
  EXPECT_THROW(apply_json(cfg, R"({"schemes": ["UPC-XYZ"]})"), ConfigParseError);
}

TEST(Config, SeedFromEnvironment) {
  ::setenv("CODEDMM_SEED", "1234", 1);
  EXPECT_EQ(default_seed(), 1234u);
  ::setenv("CODEDMM_SEED", "abc", 1);
  EXPECT_EQ(default_seed(), 1u);
  ::unsetenv("CODEDMM_SEED");
  EXPECT_EQ(default_seed(), 1u);
}

TEST(Sweep, SingleSchemeSingleBudget) {
  ExperimentConfig cfg;
  cfg.schemes = {Scheme::BPC_VO};
  cfg.budgets = {12};
  cfg.trials = 1;
  std::ostringstream out;
  cmd_sweep(cfg, out);
  const auto ls = lines(out.str());
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(ls[0], "scheme,budget,feasible,mean_time,ci,mean_wasted,m_A,m_B,eta,R_th");
  EXPECT_EQ(ls[1].rfind("BPC-VO,12,1,", 0), 0u);
}

TEST(Sweep, ByteIdenticalAcrossRunsAndThreads) {
  auto cfg = small_sweep();
  std::ostringstream a;
  std::ostringstream b;
  cmd_sweep(cfg, a);
  cfg.threads = 3;
  cmd_sweep(cfg, b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().find('\r'), std::string::npos);
}

TEST(Sweep, RowsAgreeWithSchemeRecomputation) {
  const auto cfg = small_sweep();
  std::ostringstream out;
  cmd_sweep(cfg, out);
  const auto ls = lines(out.str());
  ASSERT_EQ(ls.size(), 1 + cfg.schemes.size() * cfg.budgets.size());
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto f = fields(ls[i]);
    ASSERT_EQ(f.size(), 10u) << ls[i];
    const Scheme s = parse_scheme(f[0]);
    const std::int64_t budget = std::stoll(f[1]);
    if (f[2] == "0") {
      EXPECT_TRUE(f[3].empty());
      continue;
    }
    const auto alloc =
        allocate_storage(s, cfg.cost_plan(), budget, {cfg.workers, cfg.mu_a, cfg.mu_b, cfg.n_a, cfg.n_b});
    const auto sc = make_homogeneous(s, cfg.cost_plan(), cfg.workers, alloc.storage, cfg.mu_a, cfg.mu_b,
                                     alloc.n_a, alloc.n_b);
    EXPECT_EQ(std::stoi(f[6]), alloc.storage.m_a);
    EXPECT_EQ(std::stoi(f[7]), alloc.storage.m_b);
    EXPECT_EQ(std::stoi(f[8]), eta(sc, 0));
    EXPECT_EQ(std::stoll(f[9]), recovery_threshold(sc));
  }
}

TEST(Sweep, InfeasiblePairsAreFlagged) {
  ExperimentConfig cfg;
  cfg.schemes = {Scheme::UPC, Scheme::UPC_PC};
  cfg.budgets = {8};
  cfg.trials = 1;
  std::ostringstream out;
  cmd_sweep(cfg, out);
  const auto ls = lines(out.str());
  EXPECT_EQ(ls[1], "UPC,8,0,,,,,,,");
  EXPECT_EQ(ls[2], "UPC-PC,8,0,,,,,,,");
}

TEST(Sweep, FormatIsLocaleFree) {
  EXPECT_EQ(format_fixed(1.5, 3), "1.500");
  EXPECT_EQ(format_fixed(-0.0004, 3), "-0.000");
}

TEST(Regularity, VerticalAndGridProfilesAreRegular) {
  ExperimentConfig cfg;
  cfg.plan = PartitionPlan{4, 1, 4, 4, 4};
  cfg.schemes = {Scheme::BPC_VO};
  cfg.profiles = 20;
  cfg.draws = 10;
  std::ostringstream out;
  cmd_verify_regularity(cfg, out);
  auto ls = lines(out.str());
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(ls[1].rfind("BPC-VO,200,1.000000,", 0), 0u) << ls[1];
  cfg.profile_kind = "grid";
  std::ostringstream grid;
  cmd_verify_regularity(cfg, grid);
  ls = lines(grid.str());
  EXPECT_EQ(ls[1].rfind("grid,200,1.000000,", 0), 0u) << ls[1];
  cfg.profile_kind = "violating";
  std::ostringstream bad;
  EXPECT_NO_THROW(cmd_verify_regularity(cfg, bad));
  EXPECT_EQ(lines(bad.str()).size(), 2u);
}

TEST(Demo, DefaultsSucceed) {
  std::ostringstream out;
  std::ostringstream err;
  EXPECT_EQ(cmd_demo_exec(demo_defaults(), out, err), 0) << err.str();
  EXPECT_NE(out.str().find("rel_error="), std::string::npos);
}

TEST(Demo, DuplicatePointsFail) {
  auto cfg = demo_defaults();
  cfg.duplicate_points = true;
  std::ostringstream out;
  std::ostringstream err;
  EXPECT_NE(cmd_demo_exec(cfg, out, err), 0);
  EXPECT_NE(err.str().find("singular"), std::string::npos) << err.str();
}

TEST(Demo, BudgetBelowMinimumIsInfeasible) {
  auto cfg = demo_defaults();
  cfg.plan = PartitionPlan{18, 4, 18, 9, 9};
  cfg.budget = 3;
  std::ostringstream out;
  std::ostringstream err;
  EXPECT_NE(cmd_demo_exec(cfg, out, err), 0);
  EXPECT_NE(err.str().find("infeasible"), std::string::npos) << err.str();
}

TEST(Demo, GuardRejectsLargePlans) {
  auto cfg = demo_defaults();
  cfg.plan = PartitionPlan{18, 4, 18, 9, 9};
  cfg.workers = 20;
  std::ostringstream out;
  std::ostringstream err;
  EXPECT_NE(cmd_demo_exec(cfg, out, err), 0);
  EXPECT_NE(err.str().find("K*L <= 64"), std::string::npos) << err.str();
}

TEST(Metrics, PrintsExactFractions) {
  ExperimentConfig cfg;
  cfg.schemes = {Scheme::BPC_NZO};
  cfg.budgets = {20};
  std::ostringstream out;
  cmd_metrics(cfg, out);
  const auto ls = lines(out.str());
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(ls[1], "BPC-NZO,20,10,10,100,103,1/100,1,17/100");
}
