#include "polycode/schemes.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <utility>

namespace polycode {

namespace {

constexpr std::array<std::pair<Scheme, std::string_view>, 8> kNames{{
    {Scheme::UPC, "UPC"},
    {Scheme::UPC_PC, "UPC-PC"},
    {Scheme::B_PROC, "B-PROC"},
    {Scheme::BPC_VO, "BPC-VO"},
    {Scheme::BPC_HO, "BPC-HO"},
    {Scheme::BPC_NZO, "BPC-NZO"},
    {Scheme::BPC_ZZO, "BPC-ZZO"},
    {Scheme::LOWER_BOUND, "LOWER-BOUND"},
}};

bool divides(int d, int n) { return d > 0 && n % d == 0; }

bool horizontal_type(Scheme s) { return s == Scheme::BPC_HO || s == Scheme::BPC_ZZO; }

std::string worker_tag(int i) { return "worker " + std::to_string(i) + ": "; }

}  // namespace

std::string_view to_string(Scheme s) {
  for (const auto& [scheme, name] : kNames) {
    if (scheme == s) return name;
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  for (const auto& [scheme, n] : kNames) {
    if (n == name) return scheme;
  }
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

bool is_bivariate_hermite(Scheme s) {
  return s == Scheme::BPC_VO || s == Scheme::BPC_HO || s == Scheme::BPC_NZO ||
         s == Scheme::BPC_ZZO;
}

SchemeConfig make_homogeneous(Scheme scheme, const PartitionPlan& plan, int workers, Storage st,
                              int mu_a, int mu_b, int n_a, int n_b) {
  SchemeConfig cfg;
  cfg.scheme = scheme;
  cfg.plan = plan;
  cfg.workers = workers;
  cfg.storage.assign(static_cast<std::size_t>(std::max(workers, 0)), st);
  cfg.mu_a = mu_a;
  cfg.mu_b = mu_b;
  cfg.n_a = n_a;
  cfg.n_b = n_b;
  return cfg;
}

bool storage_admissible(Scheme scheme, int K, int L, Storage st, int mu_a, int mu_b) {
  const int ma = st.m_a;
  const int mb = st.m_b;
  if (ma < 1 || mb < 1 || ma > K || mb > L) return false;
  switch (scheme) {
    case Scheme::UPC:
      return ma == 1 && mb == 1;
    case Scheme::UPC_PC:
      return ma == mb && ma <= std::min(K, L);
    case Scheme::B_PROC:
    case Scheme::LOWER_BOUND:
      return true;
    case Scheme::BPC_VO:
      return ma == 1 || mb == L;
    case Scheme::BPC_HO:
      return mb == 1 || ma == K;
    case Scheme::BPC_NZO:
      if (!divides(mu_b, L)) return false;
      return (ma == K && mb % mu_b == 0) || mb == mu_b || (ma == 1 && mb <= mu_b);
    case Scheme::BPC_ZZO:
      if (!divides(mu_a, K)) return false;
      return (mb == L && ma % mu_a == 0) || ma == mu_a || (mb == 1 && ma <= mu_a);
  }
  return false;
}

void validate(const SchemeConfig& cfg) {
  try {
    cfg.plan.validate();
  } catch (const DimensionError& e) {
    throw ConfigError(e.what());
  }
  const int K = cfg.K();
  const int L = cfg.L();
  if (cfg.workers < 1) throw ConfigError("at least one worker is required");
  if (cfg.storage.size() != static_cast<std::size_t>(cfg.workers)) {
    throw ConfigError("storage list must have one entry per worker");
  }
  if (cfg.scheme == Scheme::BPC_NZO && !divides(cfg.mu_b, L)) {
    throw ConfigError("BPC-NZO needs mu_B dividing L");
  }
  if (cfg.scheme == Scheme::BPC_ZZO && !divides(cfg.mu_a, K)) {
    throw ConfigError("BPC-ZZO needs mu_A dividing K");
  }
  if (cfg.scheme == Scheme::UPC && cfg.workers < K * L) {
    throw ConfigError("UPC needs N >= K*L workers");
  }
  for (int i = 0; i < cfg.workers; ++i) {
    const Storage st = cfg.storage[static_cast<std::size_t>(i)];
    if (!storage_admissible(cfg.scheme, K, L, st, cfg.mu_a, cfg.mu_b)) {
      throw ConfigError(worker_tag(i) + "storage (" + std::to_string(st.m_a) + "," +
                        std::to_string(st.m_b) + ") violates the " +
                        std::string(to_string(cfg.scheme)) + " constraints");
    }
  }
  if (cfg.scheme == Scheme::B_PROC) {
    if (cfg.n_a < 1 || cfg.n_b < 1 || cfg.n_a * cfg.n_b != cfg.workers) {
      throw ConfigError("B-PROC needs N = n_A * n_B");
    }
    const Storage first = cfg.storage.front();
    if (!std::all_of(cfg.storage.begin(), cfg.storage.end(),
                     [&](const Storage& s) { return s == first; })) {
      throw ConfigError("B-PROC needs homogeneous storage");
    }
    if (K > cfg.n_a * first.m_a || L > cfg.n_b * first.m_b) {
      throw ConfigError("B-PROC needs K <= n_A m_A and L <= n_B m_B");
    }
  }
}

std::vector<Cell> priority_sequence(Scheme scheme, int K, int L, int mu_a, int mu_b) {
  std::vector<Cell> seq;
  seq.reserve(static_cast<std::size_t>(K * L));
  switch (scheme) {
    case Scheme::BPC_VO:
      mu_b = L;
      [[fallthrough]];
    case Scheme::BPC_NZO:
      if (!divides(mu_b, L)) throw ConfigError("mu_B must divide L");
      // horizontal blocks of mu_B rows, bottom-up; column by column inside
      for (int base = 0; base < L; base += mu_b) {
        for (int k = 0; k < K; ++k) {
          for (int l = base; l < base + mu_b; ++l) seq.push_back({k, l});
        }
      }
      break;
    case Scheme::BPC_HO:
      mu_a = K;
      [[fallthrough]];
    case Scheme::BPC_ZZO:
      if (!divides(mu_a, K)) throw ConfigError("mu_A must divide K");
      for (int base = 0; base < K; base += mu_a) {
        for (int l = 0; l < L; ++l) {
          for (int k = base; k < base + mu_a; ++k) seq.push_back({k, l});
        }
      }
      break;
    default:
      throw ConfigError("priority_sequence: scheme has no derivative order");
  }
  return seq;
}

std::vector<Cell> truncated_order(Scheme scheme, int K, int L, Storage st, int mu_a, int mu_b) {
  std::vector<Cell> out;
  for (const Cell& c : priority_sequence(scheme, K, L, mu_a, mu_b)) {
    if (c.k >= st.m_a || c.l >= st.m_b) break;
    out.push_back(c);
  }
  return out;
}

std::vector<Cell> computation_order(const SchemeConfig& cfg, int worker, std::mt19937_64* rng) {
  const Storage st = cfg.storage.at(static_cast<std::size_t>(worker));
  std::vector<Cell> out;
  switch (cfg.scheme) {
    case Scheme::UPC:
      out.push_back({0, 0});
      break;
    case Scheme::UPC_PC:
      for (int j = 0; j < st.m_a; ++j) out.push_back({j, j});
      break;
    case Scheme::B_PROC:
    case Scheme::LOWER_BOUND:
      for (int k = 0; k < st.m_a; ++k) {
        for (int l = 0; l < st.m_b; ++l) out.push_back({k, l});
      }
      if (cfg.scheme == Scheme::B_PROC && rng != nullptr) std::shuffle(out.begin(), out.end(), *rng);
      break;
    default:
      out = truncated_order(cfg.scheme, cfg.K(), cfg.L(), st, cfg.mu_a, cfg.mu_b);
  }
  return out;
}

int eta(const SchemeConfig& cfg, int worker) {
  const Storage st = cfg.storage.at(static_cast<std::size_t>(worker));
  switch (cfg.scheme) {
    case Scheme::UPC:
      return 1;
    case Scheme::UPC_PC:
      return st.m_a;
    case Scheme::B_PROC:
    case Scheme::LOWER_BOUND:
      return st.m_a * st.m_b;
    default:
      return static_cast<int>(
          truncated_order(cfg.scheme, cfg.K(), cfg.L(), st, cfg.mu_a, cfg.mu_b).size());
  }
}

std::int64_t recovery_threshold(const SchemeConfig& cfg) {
  const std::int64_t K = cfg.K();
  const std::int64_t L = cfg.L();
  const std::int64_t KL = K * L;
  switch (cfg.scheme) {
    case Scheme::BPC_NZO:
      return KL + std::max<std::int64_t>(0, (cfg.mu_b - 2) * (L / cfg.mu_b - 1));
    case Scheme::BPC_ZZO:
      return KL + std::max<std::int64_t>(0, (cfg.mu_a - 2) * (K / cfg.mu_a - 1));
    case Scheme::B_PROC: {
      const Storage st = cfg.storage.front();
      return KL + (static_cast<std::int64_t>(cfg.n_b) * st.m_b - L) * (K - 1) +
             (static_cast<std::int64_t>(cfg.n_a) * st.m_a - K) * (L - 1);
    }
    default:
      return KL;
  }
}

std::optional<std::int64_t> fixed_stop_count(const SchemeConfig& cfg) {
  if (cfg.scheme == Scheme::B_PROC) return std::nullopt;
  return recovery_threshold(cfg);
}

Metrics metrics(const SchemeConfig& cfg) {
  const std::int64_t KL = static_cast<std::int64_t>(cfg.K()) * cfg.L();
  Metrics m;
  m.c_part = Rational(1, KL);
  m.c_max.reserve(static_cast<std::size_t>(cfg.workers));
  for (int i = 0; i < cfg.workers; ++i) m.c_max.push_back(Rational(eta(cfg, i), KL));
  if (cfg.scheme == Scheme::UPC) {
    // every response past the KL-th is lost: (N - R_th) C_part
    m.c_wasted = Rational(cfg.workers - KL, KL);
  } else {
    // N-1 in-flight computations plus R_th - KL received-but-unused ones
    m.c_wasted = Rational(cfg.workers - 1, KL) + Rational(recovery_threshold(cfg) - KL, KL);
  }
  return m;
}

Allocation allocate_storage(Scheme scheme, const PartitionPlan& plan, std::int64_t budget,
                            const AllocationParams& params) {
  plan.validate();
  const int K = static_cast<int>(plan.K);
  const int L = static_cast<int>(plan.L);
  const auto a_cost = static_cast<std::int64_t>(plan.block_rows());
  const auto b_cost = static_cast<std::int64_t>(plan.block_cols());

  std::optional<Allocation> best;
  auto better = [&](const Allocation& cand, const Allocation& cur) {
    if (cand.eta != cur.eta) return cand.eta > cur.eta;
    const int cs = cand.storage.m_a + cand.storage.m_b;
    const int us = cur.storage.m_a + cur.storage.m_b;
    if (cs != us) return cs > us;
    if (horizontal_type(scheme)) return cand.storage.m_a > cur.storage.m_a;
    return cand.storage.m_b > cur.storage.m_b;
  };

  for (int ma = 1; ma <= K; ++ma) {
    for (int mb = 1; mb <= L; ++mb) {
      const Storage st{ma, mb};
      if (ma * a_cost + mb * b_cost > budget) continue;
      if (!storage_admissible(scheme, K, L, st, params.mu_a, params.mu_b)) continue;
      Allocation cand{st, 0, 0, 0};
      if (scheme == Scheme::B_PROC) {
        // pick the grid factorization with the smallest worst-case threshold
        std::optional<std::int64_t> best_rth;
        for (int na = 1; na <= params.workers; ++na) {
          if (params.workers % na != 0) continue;
          const int nb = params.workers / na;
          if (params.n_a > 0 && (na != params.n_a || nb != params.n_b)) continue;
          if (K > na * ma || L > nb * mb) continue;
          const std::int64_t rth = static_cast<std::int64_t>(K) * L +
                                   (static_cast<std::int64_t>(nb) * mb - L) * (K - 1) +
                                   (static_cast<std::int64_t>(na) * ma - K) * (L - 1);
          if (!best_rth || rth < *best_rth) {
            best_rth = rth;
            cand.n_a = na;
            cand.n_b = nb;
          }
        }
        if (!best_rth) continue;
      }
      SchemeConfig probe = make_homogeneous(scheme, plan, 1, st, params.mu_a, params.mu_b);
      cand.eta = eta(probe, 0);
      if (!best || better(cand, *best)) best = cand;
    }
  }
  if (!best) {
    throw InfeasibleBudget(std::string(to_string(scheme)) + ": budget " + std::to_string(budget) +
                           " admits no feasible (m_A, m_B)");
  }
  return *best;
}

}  // namespace polycode
