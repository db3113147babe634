#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the library code it is meant to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "polycode/matrix.hpp"
#include "polycode/rational.hpp"
#include "polycode/schemes.hpp"

namespace oracle {

using polycode::Block;
using polycode::Cell;
using polycode::Rational;
using polycode::Scheme;
using polycode::Storage;

/// 0-based priority scores; smaller is computed first.
inline std::int64_t score(Scheme s, int K, int L, int mu_a, int mu_b, Cell c) {
  switch (s) {
    case Scheme::BPC_VO:
      return static_cast<std::int64_t>(c.k) * L + c.l;
    case Scheme::BPC_HO:
      return static_cast<std::int64_t>(c.l) * K + c.k;
    case Scheme::BPC_NZO:
      return static_cast<std::int64_t>(c.l / mu_b) * K * mu_b + static_cast<std::int64_t>(c.k) * mu_b + c.l % mu_b;
    case Scheme::BPC_ZZO:
      return static_cast<std::int64_t>(c.k / mu_a) * L * mu_a + static_cast<std::int64_t>(c.l) * mu_a + c.k % mu_a;
    default:
      return 0;
  }
}

inline bool available(Storage st, Cell c) { return c.k < st.m_a && c.l < st.m_b; }

/// Cells sorted by score and cut at the first unavailable one.
inline std::vector<Cell> expected_order(Scheme s, int K, int L, int mu_a, int mu_b, Storage st) {
  std::vector<Cell> all;
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) all.push_back({k, l});
  }
  std::sort(all.begin(), all.end(), [&](Cell a, Cell b) {
    return score(s, K, L, mu_a, mu_b, a) < score(s, K, L, mu_a, mu_b, b);
  });
  std::vector<Cell> out;
  for (Cell c : all) {
    if (!available(st, c)) break;
    out.push_back(c);
  }
  return out;
}

/// Priority-consistency rule: scores strictly increase along the list, every
/// cell scored strictly between two consecutive entries is unavailable, the
/// list starts at the lowest-scored cell and the next cell after the last
/// entry (if any) is unavailable.
inline bool priority_consistent(Scheme s, int K, int L, int mu_a, int mu_b, Storage st,
                                const std::vector<Cell>& order) {
  std::vector<Cell> all;
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) all.push_back({k, l});
  }
  auto sc = [&](Cell c) { return score(s, K, L, mu_a, mu_b, c); };
  for (Cell c : order) {
    if (!available(st, c)) return false;
  }
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    if (sc(order[i]) >= sc(order[i + 1])) return false;
    for (Cell w : all) {
      if (sc(w) > sc(order[i]) && sc(w) < sc(order[i + 1]) && available(st, w)) return false;
    }
  }
  const std::int64_t first = order.empty() ? -1 : sc(order.front());
  for (Cell w : all) {
    if (!order.empty() && sc(w) < first) return false;
  }
  // the cell right after the last entry must be unavailable
  std::optional<Cell> next;
  const std::int64_t last = order.empty() ? -1 : sc(order.back());
  for (Cell w : all) {
    if (sc(w) > last && (!next || sc(w) < sc(*next))) next = w;
  }
  return !next || !available(st, *next);
}

/// Direct sum_i sum_j A_i B_j x^(i) y^(j) with k-th / l-th derivatives by the
/// power rule, no Horner.
inline Block mixed_partial(const std::vector<Block>& a, const std::vector<Block>& b, double x, double y,
                           int k, int l) {
  Block out = Block::Zero(a.front().rows(), b.front().cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const int ii = static_cast<int>(i);
      const int jj = static_cast<int>(j);
      if (ii < k || jj < l) continue;
      double cx = 1.0;
      for (int t = 0; t < k; ++t) cx *= ii - t;
      double cy = 1.0;
      for (int t = 0; t < l; ++t) cy *= jj - t;
      const double w = cx * std::pow(x, ii - k) * cy * std::pow(y, jj - l);
      out += w * (a[i] * b[j]);
    }
  }
  return out;
}

struct TableMetrics {
  Rational c_part;
  std::vector<Rational> c_max;
  Rational c_wasted;
};

/// Closed forms written with the stored fractions M_A = m_A / K and
/// M_B = m_B / L instead of eta counts.
inline TableMetrics table_metrics(const polycode::SchemeConfig& cfg, const std::vector<int>& etas,
                                  std::int64_t r_th) {
  const int K = cfg.K();
  const int L = cfg.L();
  const int N = cfg.workers;
  TableMetrics m;
  m.c_part = Rational(1, static_cast<std::int64_t>(K) * L);
  for (int i = 0; i < N; ++i) {
    const Storage st = cfg.storage[static_cast<std::size_t>(i)];
    const Rational MA(st.m_a, K);
    const Rational MB(st.m_b, L);
    switch (cfg.scheme) {
      case Scheme::UPC:
        m.c_max.push_back(MA * MB);
        break;
      case Scheme::UPC_PC:
        m.c_max.push_back(MA * MB / Rational(st.m_a));
        break;
      default:
        m.c_max.push_back(Rational(etas[static_cast<std::size_t>(i)], static_cast<std::int64_t>(st.m_a) * st.m_b) *
                          MA * MB);
    }
  }
  Rational sum;
  for (int i = 0; i + 1 < N; ++i) {
    const Storage st = cfg.storage[static_cast<std::size_t>(i)];
    const Rational MA(st.m_a, K);
    const Rational MB(st.m_b, L);
    if (cfg.scheme == Scheme::UPC_PC) {
      sum += MA * MB / Rational(static_cast<std::int64_t>(st.m_a) * st.m_a);
    } else {
      sum += MA * MB / Rational(static_cast<std::int64_t>(st.m_a) * st.m_b);
    }
  }
  const std::int64_t KL = static_cast<std::int64_t>(K) * L;
  switch (cfg.scheme) {
    case Scheme::UPC:
      m.c_wasted = Rational(N) * Rational(1, K) * Rational(1, L) - Rational(1);
      break;
    case Scheme::UPC_PC:
      m.c_wasted = sum;
      break;
    case Scheme::B_PROC: {
      const Storage st = cfg.storage.front();
      const std::int64_t extra = (static_cast<std::int64_t>(cfg.n_b) * st.m_b - L) * (K - 1) +
                                 (static_cast<std::int64_t>(cfg.n_a) * st.m_a - K) * (L - 1);
      m.c_wasted = sum + Rational(extra, KL);
      break;
    }
    default:
      m.c_wasted = sum + Rational(r_th, KL) - Rational(1);
  }
  return m;
}

/// Worst-case thresholds restated from the scheme definitions.
inline std::int64_t threshold(const polycode::SchemeConfig& cfg) {
  const std::int64_t K = cfg.K();
  const std::int64_t L = cfg.L();
  switch (cfg.scheme) {
    case Scheme::BPC_NZO:
      return K * L + std::max<std::int64_t>(0, (cfg.mu_b - 2) * (L / cfg.mu_b - 1));
    case Scheme::BPC_ZZO:
      return K * L + std::max<std::int64_t>(0, (cfg.mu_a - 2) * (K / cfg.mu_a - 1));
    case Scheme::B_PROC: {
      const Storage st = cfg.storage.front();
      return K * L + (cfg.n_b * st.m_b - L) * (K - 1) + (cfg.n_a * st.m_a - K) * (L - 1);
    }
    default:
      return K * L;
  }
}

/// Per-worker constraint sets, written independently of the library.
inline bool admissible(Scheme s, int K, int L, int mu_a, int mu_b, Storage st) {
  const int a = st.m_a;
  const int b = st.m_b;
  if (a < 1 || b < 1 || a > K || b > L) return false;
  switch (s) {
    case Scheme::UPC:
      return a == 1 && b == 1;
    case Scheme::UPC_PC:
      return a == b;
    case Scheme::BPC_VO:
      return a == 1 || b == L;
    case Scheme::BPC_HO:
      return b == 1 || a == K;
    case Scheme::BPC_NZO:
      return L % mu_b == 0 && ((a == K && b % mu_b == 0) || b == mu_b || (a == 1 && b <= mu_b));
    case Scheme::BPC_ZZO:
      return K % mu_a == 0 && ((b == L && a % mu_a == 0) || a == mu_a || (b == 1 && a <= mu_a));
    default:
      return true;
  }
}

}  // namespace oracle
