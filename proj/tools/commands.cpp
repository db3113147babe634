#include "commands.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <thread>

#include "polycode/executor.hpp"
#include "polycode/interp.hpp"
#include "profiles.hpp"

namespace polycode::cli {

std::string format_fixed(double v, int precision) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, precision);
  return std::string(buf.data(), res.ptr);
}

SweepPoint plan_point(const ExperimentConfig& cfg, Scheme scheme, std::int64_t budget) {
  SweepPoint pt;
  pt.scheme = scheme;
  pt.budget = budget;
  const PartitionPlan plan = cfg.cost_plan();
  Allocation alloc;
  try {
    alloc = allocate_storage(scheme, plan, budget, {cfg.workers, cfg.mu_a, cfg.mu_b, cfg.n_a, cfg.n_b});
  } catch (const InfeasibleBudget& e) {
    pt.reason = e.what();
    return pt;
  }
  SchemeConfig sc = make_homogeneous(scheme, plan, cfg.workers, alloc.storage, cfg.mu_a, cfg.mu_b,
                                     alloc.n_a, alloc.n_b);
  try {
    validate(sc);
  } catch (const ConfigError& e) {
    pt.reason = e.what();
    return pt;
  }
  pt.eta = eta(sc, 0);
  pt.r_th = recovery_threshold(sc);
  const std::int64_t capacity = static_cast<std::int64_t>(pt.eta) * cfg.workers;
  const std::int64_t need = StopRule(sc).required();
  if (capacity < need) {
    pt.reason = std::string(to_string(scheme)) + ": workers deliver at most " + std::to_string(capacity) +
                " computations, " + std::to_string(need) + " needed";
    return pt;
  }
  pt.feasible = true;
  pt.config = std::move(sc);
  return pt;
}

void cmd_sweep(const ExperimentConfig& cfg, std::ostream& out) {
  validate(cfg);
  std::vector<SweepPoint> points;
  for (Scheme s : cfg.schemes) {
    for (std::int64_t b : cfg.budgets) points.push_back(plan_point(cfg, s, b));
  }
  std::vector<MonteCarloResult> results(points.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      if (!points[i].feasible) continue;
      results[i] = monte_carlo(*points[i].config, cfg.model, cfg.trials, cfg.seed, 1, cfg.optimistic);
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto pool = static_cast<std::size_t>(cfg.threads > 0 ? cfg.threads : static_cast<int>(hw));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < std::min(pool, points.size()); ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();

  out << "scheme,budget,feasible,mean_time,ci,mean_wasted,m_A,m_B,eta,R_th\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    out << to_string(p.scheme) << ',' << p.budget << ',';
    if (!p.feasible) {
      out << "0,,,,,,,\n";
      continue;
    }
    const Storage st = p.config->storage.front();
    out << "1," << format_fixed(results[i].mean_time, 6) << ',' << format_fixed(results[i].ci_half_width, 6)
        << ',' << format_fixed(results[i].mean_wasted, 6) << ',' << st.m_a << ',' << st.m_b << ',' << p.eta
        << ',' << p.r_th << '\n';
  }
}

namespace {

struct Tally {
  int trials = 0;
  int nonsingular = 0;
  double min_ratio = 1.0;

  void add(const RegularityReport& r) {
    trials += r.trials;
    nonsingular += r.nonsingular;
    min_ratio = std::min(min_ratio, r.min_ratio);
  }
};

Tally regularity_for(const ExperimentConfig& cfg, Scheme scheme) {
  const int K = static_cast<int>(cfg.plan.K);
  const int L = static_cast<int>(cfg.plan.L);
  Tally tally;
  std::mt19937_64 rng(cfg.seed);
  for (int p = 0; p < cfg.profiles; ++p) {
    const std::uint64_t draw_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(p));
    if (cfg.profile_kind == "grid") {
      ResponseSampler grid = [K, L](std::mt19937_64& g) {
        const auto xs = sample_distinct(static_cast<std::size_t>(K), g);
        const auto ys = sample_distinct(static_cast<std::size_t>(L), g);
        std::vector<Response> rows;
        for (double x : xs) {
          for (double y : ys) rows.push_back({{x, y}, {0, 0}});
        }
        return rows;
      };
      tally.add(check_regularity(grid, K, L, cfg.draws, draw_seed));
      continue;
    }
    if (cfg.profile_kind == "violating") {
      const ArrivalProfile prof = random_unordered_profile(K, L, cfg.workers, rng);
      tally.add(check_regularity(prof.received, K, L, cfg.draws, draw_seed));
      continue;
    }
    if (scheme == Scheme::BPC_NZO || scheme == Scheme::BPC_ZZO) {
      const ArrivalProfile prof =
          random_profile_until_selectable(scheme, K, L, cfg.workers, cfg.mu_a, cfg.mu_b, rng);
      ResponseSampler sel = [&prof, scheme, K, L, &cfg](std::mt19937_64& g) {
        const auto sets = attach_points(prof, g);
        return select_responses(sets, scheme, K, L, cfg.mu_a, cfg.mu_b).retained;
      };
      tally.add(check_regularity(sel, K, L, cfg.draws, draw_seed));
    } else {
      const ArrivalProfile prof =
          random_profile(scheme, K, L, cfg.workers, cfg.mu_a, cfg.mu_b, static_cast<std::int64_t>(K) * L, rng);
      tally.add(check_regularity(prof.received, K, L, cfg.draws, draw_seed));
    }
  }
  return tally;
}

}  // namespace

void cmd_verify_regularity(const ExperimentConfig& cfg, std::ostream& out) {
  validate(cfg);
  out << "profile,trials,nonsingular_fraction,min_ratio\n";
  std::vector<Scheme> schemes;
  if (cfg.profile_kind == "conforming") {
    for (Scheme s : cfg.schemes) {
      if (is_bivariate_hermite(s)) schemes.push_back(s);
    }
  } else {
    schemes.push_back(cfg.profile_kind == "grid" ? Scheme::B_PROC : Scheme::BPC_VO);
  }
  for (Scheme s : schemes) {
    const Tally t = regularity_for(cfg, s);
    const std::string label = cfg.profile_kind == "conforming" ? std::string(to_string(s)) : cfg.profile_kind;
    out << label << ',' << t.trials << ','
        << format_fixed(t.trials ? static_cast<double>(t.nonsingular) / t.trials : 0.0, 6) << ','
        << std::scientific << std::setprecision(3) << t.min_ratio << std::defaultfloat << '\n';
  }
}

ExperimentConfig demo_defaults() {
  ExperimentConfig cfg;
  cfg.plan = PartitionPlan{30, 12, 30, 3, 3};
  cfg.workers = 5;
  cfg.schemes = {Scheme::BPC_VO};
  cfg.budgets.clear();
  cfg.mu_a = 3;
  cfg.mu_b = 3;
  cfg.seed = default_seed();
  return cfg;
}

int cmd_demo_exec(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  validate(cfg);
  const int K = static_cast<int>(cfg.plan.K);
  const int L = static_cast<int>(cfg.plan.L);
  int status = 0;
  for (Scheme scheme : cfg.schemes) {
    if (scheme == Scheme::LOWER_BOUND) {
      err << "LOWER-BOUND is simulation-only; skipped\n";
      continue;
    }
    SweepPoint pt;
    if (cfg.budget > 0) {
      pt = plan_point(cfg, scheme, cfg.budget);
    } else {
      const std::int64_t top = static_cast<std::int64_t>(K) + static_cast<std::int64_t>(L) * cfg.partition_ratio;
      for (std::int64_t b = 1; b <= top && !pt.feasible; ++b) pt = plan_point(cfg, scheme, b);
    }
    if (!pt.feasible) {
      err << "infeasible: " << (pt.reason.empty() ? std::string(to_string(scheme)) : pt.reason) << '\n';
      status = 2;
      continue;
    }
    if (K * L > 64) {
      err << "demo-exec is limited to K*L <= 64 (got " << K * L << ")\n";
      return 2;
    }
    SchemeConfig sc = *pt.config;
    sc.plan = cfg.plan;

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Block A(static_cast<Eigen::Index>(cfg.plan.r), static_cast<Eigen::Index>(cfg.plan.s));
    Block B(static_cast<Eigen::Index>(cfg.plan.s), static_cast<Eigen::Index>(cfg.plan.c));
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = u(rng);

    JobOptions opt;
    opt.seed = cfg.seed;
    opt.duplicate_points = cfg.duplicate_points;
    opt.parallelism = cfg.threads;
    DelayModel delay{cfg.model, cfg.seconds_per_unit};
    out << to_string(scheme) << ": K=" << K << " L=" << L << " N=" << cfg.workers << " budget=" << pt.budget
        << " m_A=" << sc.storage.front().m_a << " m_B=" << sc.storage.front().m_b << " eta=" << pt.eta
        << " R_th=" << pt.r_th << '\n';
    JobResult res;
    try {
      res = run_job(A, B, sc, delay, opt);
    } catch (const SingularSystemError& e) {
      err << to_string(scheme) << ": decode failed, singular system (sigma ratio "
          << std::scientific << std::setprecision(3) << e.singular_value_ratio() << std::defaultfloat
          << "): " << e.what() << '\n';
      status = 1;
      continue;
    } catch (const CapacityError& e) {
      err << to_string(scheme) << ": " << e.what() << '\n';
      status = 1;
      continue;
    }
    const Block direct = A * B;
    const double error = relative_frobenius_error(res.product, direct);
    const JobReport& rep = res.report;
    out << "  worker  capacity  delivered  used\n";
    for (const auto& w : rep.workers) {
      out << "  " << std::setw(6) << w.worker << "  " << std::setw(8) << w.capacity << "  " << std::setw(9)
          << w.delivered << "  " << std::setw(4) << w.used << '\n';
    }
    out << "  arrivals=" << rep.arrivals << " used=" << rep.used << " discarded=" << rep.discarded
        << " ongoing=" << rep.ongoing_at_stop << " wasted=" << format_fixed(rep.realized_wasted_fraction, 4)
        << '\n';
    out << "  condition=" << std::scientific << std::setprecision(3) << rep.condition_number
        << " rel_error=" << error << std::defaultfloat << '\n';
    if (!(error < 1e-6)) {
      err << to_string(scheme) << ": decode error " << error << " exceeds 1e-6\n";
      status = 1;
    }
  }
  return status;
}

void cmd_metrics(const ExperimentConfig& cfg, std::ostream& out) {
  validate(cfg);
  out << "scheme,budget,m_A,m_B,eta,R_th,C_part,C_max,C_wasted\n";
  for (Scheme s : cfg.schemes) {
    for (std::int64_t b : cfg.budgets) {
      const SweepPoint pt = plan_point(cfg, s, b);
      if (!pt.feasible) {
        out << to_string(s) << ',' << b << ",,,,,,,\n";
        continue;
      }
      const Metrics m = metrics(*pt.config);
      const Storage st = pt.config->storage.front();
      out << to_string(s) << ',' << b << ',' << st.m_a << ',' << st.m_b << ',' << pt.eta << ',' << pt.r_th << ','
          << m.c_part.str() << ',' << m.c_max.front().str() << ',' << m.c_wasted.str() << '\n';
    }
  }
}

}  // namespace polycode::cli
