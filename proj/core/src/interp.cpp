#include "polycode/interp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "polycode/encoding.hpp"

namespace polycode {

namespace {

Eigen::RowVectorXd flatten(const Block& b) {
  return Eigen::Map<const Eigen::RowVectorXd>(b.data(), b.size());
}

Block unflatten(const Eigen::Ref<const Eigen::RowVectorXd>& row, Eigen::Index rows,
                Eigen::Index cols) {
  Block out(rows, cols);
  Eigen::Map<Eigen::RowVectorXd>(out.data(), out.size()) = row;
  return out;
}

Eigen::MatrixXd stack_payloads(std::span<const Block> payloads) {
  const auto& first = payloads.front();
  Eigen::MatrixXd rhs(static_cast<Eigen::Index>(payloads.size()), first.size());
  for (std::size_t t = 0; t < payloads.size(); ++t) {
    if (payloads[t].rows() != first.rows() || payloads[t].cols() != first.cols()) {
      throw DimensionError("decode: response payloads differ in shape");
    }
    rhs.row(static_cast<Eigen::Index>(t)) = flatten(payloads[t]);
  }
  return rhs;
}

double int_pow(double base, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over the combined state
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<double> sample_distinct(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    const double v = dist(rng);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

std::vector<double> sample_stratified(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> strata(n);
  std::iota(strata.begin(), strata.end(), std::size_t{0});
  std::shuffle(strata.begin(), strata.end(), rng);
  // stay in the middle half of each stratum so neighbours are at least 1/n apart
  std::uniform_real_distribution<double> jitter(0.25, 0.75);
  const double width = 2.0 / static_cast<double>(n);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = -1.0 + (static_cast<double>(strata[i]) + jitter(rng)) * width;
  }
  return out;
}

Eigen::RowVectorXd interpolation_row(const EvalPoint& p, Cell order, int K, int L) {
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(K * L);
  for (int a = order.k; a < K; ++a) {
    const double xa = falling_factorial(a, order.k) * int_pow(p.x, a - order.k);
    for (int b = order.l; b < L; ++b) {
      row(a * L + b) = xa * falling_factorial(b, order.l) * int_pow(p.y, b - order.l);
    }
  }
  return row;
}

InterpolationSystem build_interpolation_matrix(std::span<const Response> responses, int K, int L) {
  if (K < 1 || L < 1) throw DimensionError("build_interpolation_matrix: K, L must be positive");
  const auto n = static_cast<std::size_t>(K) * static_cast<std::size_t>(L);
  if (responses.size() != n) {
    throw DimensionError("build_interpolation_matrix: expected " + std::to_string(n) +
                         " responses, got " + std::to_string(responses.size()));
  }
  for (std::size_t i = 0; i < responses.size(); ++i) {
    const Cell o = responses[i].order;
    if (o.k < 0 || o.k >= K || o.l < 0 || o.l >= L) {
      throw std::out_of_range("build_interpolation_matrix: derivative order outside K x L");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (responses[j].point == responses[i].point && responses[j].order == o) {
        throw DuplicateRowError("build_interpolation_matrix: duplicate (point, order) pair (" +
                                std::to_string(o.k) + "," + std::to_string(o.l) + ")");
      }
    }
  }
  InterpolationSystem sys;
  sys.K = K;
  sys.L = L;
  sys.rows.assign(responses.begin(), responses.end());
  sys.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    sys.matrix.row(static_cast<Eigen::Index>(i)) =
        interpolation_row(responses[i].point, responses[i].order, K, L);
  }
  return sys;
}

Equilibration equilibrate(const Eigen::MatrixXd& m) {
  Equilibration e{Eigen::VectorXd::Ones(m.rows()), Eigen::VectorXd::Ones(m.cols()), m};
  const auto pow2_inverse = [](double v) { return v > 0.0 ? std::ldexp(1.0, -std::ilogb(v)) : 1.0; };
  // alternating sweeps settle within a few passes for the sizes used here
  for (int sweep = 0; sweep < 8; ++sweep) {
    bool changed = false;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double f = pow2_inverse(e.scaled.row(i).cwiseAbs().maxCoeff());
      if (f != 1.0) {
        e.scaled.row(i) *= f;
        e.row(i) *= f;
        changed = true;
      }
    }
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double f = pow2_inverse(e.scaled.col(j).cwiseAbs().maxCoeff());
      if (f != 1.0) {
        e.scaled.col(j) *= f;
        e.col(j) *= f;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return e;
}

double raw_singular_value_ratio(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double hi = sv(0);
  if (!(hi > 0.0)) return 0.0;
  return sv(sv.size() - 1) / hi;
}

double singular_value_ratio(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return raw_singular_value_ratio(equilibrate(m).scaled);
}

Eigen::MatrixXd solve_checked(const Eigen::MatrixXd& m, const Eigen::MatrixXd& rhs,
                              double* ratio_out, double* cond_out) {
  const Equilibration e = equilibrate(m);
  const double ratio = raw_singular_value_ratio(e.scaled);
  if (ratio_out) *ratio_out = ratio;
  if (cond_out) *cond_out = ratio > 0.0 ? 1.0 / ratio : std::numeric_limits<double>::infinity();
  if (!(ratio > kSingularityThreshold)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", ratio);
    throw SingularSystemError(
        std::string("interpolation matrix is numerically singular (sigma_min/sigma_max = ") + buf + ")", ratio);
  }
  // solve (D_r M D_c) z = D_r R, then X = D_c z
  const Eigen::MatrixXd srhs = e.row.asDiagonal() * rhs;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(e.scaled);
  Eigen::MatrixXd z = qr.solve(srhs);
  // one refinement sweep against the scaled residual
  z += qr.solve(srhs - e.scaled * z);
  return e.col.asDiagonal() * z;
}

DecodeResult decode_bivariate(const InterpolationSystem& system, std::span<const Block> payloads) {
  if (payloads.size() != system.rows.size() || payloads.empty()) {
    throw DimensionError("decode_bivariate: one payload per interpolation row is required");
  }
  const Eigen::MatrixXd rhs = stack_payloads(payloads);
  DecodeResult out;
  const Eigen::MatrixXd coeffs =
      solve_checked(system.matrix, rhs, &out.singular_value_ratio, &out.condition_number);
  out.coefficients.reserve(payloads.size());
  for (Eigen::Index t = 0; t < coeffs.rows(); ++t) {
    out.coefficients.push_back(
        unflatten(coeffs.row(t), payloads.front().rows(), payloads.front().cols()));
  }
  return out;
}

DecodeResult decode_univariate(std::span<const double> points, std::span<const Block> payloads,
                               int K, int L) {
  const std::size_t n = static_cast<std::size_t>(K) * static_cast<std::size_t>(L);
  if (points.size() != n || payloads.size() != n) {
    throw DimensionError("decode_univariate: expected K*L points and payloads");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (points[i] == points[j]) throw DuplicateRowError("decode_univariate: repeated point");
    }
  }
  Eigen::MatrixXd v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < n; ++t) {
    double p = 1.0;
    for (std::size_t e = 0; e < n; ++e) {
      v(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(e)) = p;
      p *= points[t];
    }
  }
  DecodeResult out;
  const Eigen::MatrixXd coeffs =
      solve_checked(v, stack_payloads(payloads), &out.singular_value_ratio, &out.condition_number);
  out.coefficients.resize(n);
  // power e = i + K j carries A_{i+1} B_{j+1}
  for (int e = 0; e < static_cast<int>(n); ++e) {
    const int i = e % K;
    const int j = e / K;
    out.coefficients[static_cast<std::size_t>(i * L + j)] =
        unflatten(coeffs.row(e), payloads.front().rows(), payloads.front().cols());
  }
  return out;
}

int discard_policy_nzo(int variable_size, int pivot_size, int mu, int span) {
  if (mu < 1 || span < 1) throw std::invalid_argument("discard_policy_nzo: mu and span must be positive");
  if (variable_size <= 0 || pivot_size <= 0) return 0;
  const int block = mu * span;
  // end of the pivot's uppermost (partially) occupied block
  const int top = ((pivot_size + block - 1) / block) * block;
  if (pivot_size + variable_size <= top) return 0;
  const int r_f = variable_size % mu;
  const int fill = pivot_size % mu;
  const int l_e = fill == 0 ? 0 : mu - fill;
  if (r_f == 0 || l_e == 0 || r_f == l_e) return 0;
  return r_f > l_e ? r_f - l_e : r_f;
}

Selection select_responses(std::span<const DerivativeSet> sets, Scheme scheme, int K, int L,
                           int mu_a, int mu_b) {
  int mu = 0;
  int span = 0;
  switch (scheme) {
    case Scheme::BPC_VO:
      mu = L;
      span = K;
      break;
    case Scheme::BPC_NZO:
      mu = mu_b;
      span = K;
      break;
    case Scheme::BPC_HO:
      mu = K;
      span = L;
      break;
    case Scheme::BPC_ZZO:
      mu = mu_a;
      span = L;
      break;
    default:
      throw std::invalid_argument("select_responses: not a Hermite scheme");
  }
  const int KL = K * L;
  std::vector<int> idx(sets.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return sets[static_cast<std::size_t>(a)].orders.size() >
           sets[static_cast<std::size_t>(b)].orders.size();
  });

  Selection sel;
  int pivot = 0;
  for (int s : idx) {
    const auto& set = sets[static_cast<std::size_t>(s)];
    const int v = static_cast<int>(set.orders.size());
    if (v == 0) continue;
    int keep = 0;
    if (pivot >= KL) {
      sel.unused += v;
      continue;
    }
    if (pivot + v >= KL) {
      keep = KL - pivot;  // closing coalescence: r_f == l_e by construction
    } else {
      const int drop = discard_policy_nzo(v, pivot, mu, span);
      sel.discarded += drop;
      keep = v - drop;
    }
    if (pivot + v >= KL) sel.unused += v - keep;
    for (int t = 0; t < keep; ++t) {
      sel.retained.push_back({set.point, set.orders[static_cast<std::size_t>(t)]});
      sel.source.emplace_back(s, t);
    }
    pivot += keep;
  }
  sel.complete = pivot == KL;
  return sel;
}

RegularityReport check_regularity(const ResponseSampler& sampler, int K, int L, int trials,
                                  std::uint64_t seed) {
  struct Partial {
    int nonsingular = 0;
    double min_ratio = std::numeric_limits<double>::infinity();
  };
  auto run = [&](int begin, int end) {
    Partial p;
    for (int t = begin; t < end; ++t) {
      std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
      double ratio = 0.0;
      try {
        const auto responses = sampler(rng);
        ratio = singular_value_ratio(build_interpolation_matrix(responses, K, L).matrix);
      } catch (const DuplicateRowError&) {
        ratio = 0.0;
      }
      if (ratio > kSingularityThreshold) ++p.nonsingular;
      p.min_ratio = std::min(p.min_ratio, ratio);
    }
    return p;
  };
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int chunks = std::max(1, std::min(hw, trials));
  std::vector<std::future<Partial>> futures;
  for (int c = 0; c < chunks; ++c) {
    const int b = trials * c / chunks;
    const int e = trials * (c + 1) / chunks;
    futures.push_back(std::async(chunks == 1 ? std::launch::deferred : std::launch::async, run, b, e));
  }
  RegularityReport rep;
  rep.trials = trials;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (auto& f : futures) {
    const Partial p = f.get();
    rep.nonsingular += p.nonsingular;
    rep.min_ratio = std::min(rep.min_ratio, p.min_ratio);
  }
  rep.fraction = trials > 0 ? static_cast<double>(rep.nonsingular) / trials : 0.0;
  if (trials == 0) rep.min_ratio = 0.0;
  return rep;
}

RegularityReport check_regularity(const std::vector<std::vector<Cell>>& orders, int K, int L,
                                  int trials, std::uint64_t seed) {
  ResponseSampler sampler = [&orders](std::mt19937_64& rng) {
    const auto xs = sample_stratified(orders.size(), rng);
    const auto ys = sample_stratified(orders.size(), rng);
    std::vector<Response> out;
    for (std::size_t w = 0; w < orders.size(); ++w) {
      for (const Cell& c : orders[w]) out.push_back({{xs[w], ys[w]}, c});
    }
    return out;
  };
  return check_regularity(sampler, K, L, trials, seed);
}

}  // namespace polycode
