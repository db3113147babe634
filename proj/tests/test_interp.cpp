#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "polycode/encoding.hpp"
#include "polycode/interp.hpp"

using namespace polycode;

namespace {

std::vector<Block> random_blocks(int n, Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Block> out;
  for (int i = 0; i < n; ++i) {
    Block m(r, c);
    for (Eigen::Index t = 0; t < m.size(); ++t) m.data()[t] = u(rng);
    out.push_back(m);
  }
  return out;
}

}  // namespace

TEST(Interp, SingleResponseIsOne) {
  const Response r{{0.3, -0.4}, {0, 0}};
  const auto sys = build_interpolation_matrix(std::span(&r, 1), 1, 1);
  ASSERT_EQ(sys.matrix.rows(), 1);
  EXPECT_EQ(sys.matrix(0, 0), 1.0);
}

TEST(Interp, VandermondeDeterminant) {
  const std::vector<Response> rows{{{0.2, 0.9}, {0, 0}}, {{-0.7, 0.1}, {0, 0}}};
  const auto sys = build_interpolation_matrix(rows, 2, 1);
  EXPECT_EQ(sys.matrix(0, 1), 0.2);
  EXPECT_NEAR(sys.matrix.determinant(), -0.7 - 0.2, 1e-15);
}

TEST(Interp, SingleWorkerFullDerivativeSetHasUnitDeterminant) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 20; ++t) {
    const EvalPoint p{u(rng), u(rng)};
    const std::vector<Response> rows{{p, {0, 0}}, {p, {0, 1}}, {p, {1, 0}}, {p, {1, 1}}};
    // rows listed in column order give an upper triangular matrix with unit diagonal
    const auto sys = build_interpolation_matrix(rows, 2, 2);
    EXPECT_NEAR(sys.matrix.determinant(), 1.0, 1e-12);
  }
}

TEST(Interp, RowEntriesFollowPowerRule) {
  const auto row = interpolation_row({0.5, 2.0}, {1, 2}, 3, 4);
  // column a*L + b holds a!/(a-k)! * b!/(b-l)! * x^(a-k) * y^(b-l)
  EXPECT_EQ(row(0 * 4 + 3), 0.0);
  EXPECT_EQ(row(1 * 4 + 2), 2.0);
  EXPECT_DOUBLE_EQ(row(2 * 4 + 3), 2.0 * 6.0 * 0.5 * 2.0);
}

TEST(Interp, RejectsDuplicateRowsAndWrongCount) {
  const std::vector<Response> dup{{{0.1, 0.2}, {0, 0}}, {{0.1, 0.2}, {0, 0}}};
  EXPECT_THROW(build_interpolation_matrix(dup, 2, 1), DuplicateRowError);
  EXPECT_THROW(build_interpolation_matrix(std::span(dup.data(), 1), 2, 1), std::invalid_argument);
}

TEST(Interp, DecodeBivariateRecoversProduct) {
  std::mt19937_64 rng(2);
  const int K = 3;
  const int L = 3;
  const auto a = random_blocks(K, 4, 5, rng);
  const auto b = random_blocks(L, 5, 2, rng);
  const auto xs = sample_distinct(3, rng);
  const auto ys = sample_distinct(3, rng);
  std::vector<Response> rows;
  std::vector<Block> payloads;
  for (int w = 0; w < 3; ++w) {
    for (int l = 0; l < 3; ++l) {
      rows.push_back({{xs[w], ys[w]}, {0, l}});
      payloads.push_back(partial_product(eval_poly_A(a, xs[w], 0), eval_poly_B(b, ys[w], l)));
    }
  }
  const auto sys = build_interpolation_matrix(rows, K, L);
  const auto dec = decode_bivariate(sys, payloads);
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < L; ++j) {
      const Block ref = a[i] * b[j];
      EXPECT_LT((dec.coefficients[i * L + j] - ref).norm() / ref.norm(), 1e-8);
    }
  }
  EXPECT_GT(dec.condition_number, 1.0);
  // re-encoding the decoded coefficients reproduces every response
  for (std::size_t t = 0; t < rows.size(); ++t) {
    Block re = Block::Zero(4, 2);
    for (int i = 0; i < K; ++i) {
      for (int j = 0; j < L; ++j) re += sys.matrix(static_cast<Eigen::Index>(t), i * L + j) * dec.coefficients[i * L + j];
    }
    EXPECT_LT((re - payloads[t]).norm() / payloads[t].norm(), 1e-8);
  }
}

TEST(Interp, DecodeTrivialSystem) {
  std::mt19937_64 rng(3);
  const auto a = random_blocks(1, 3, 3, rng);
  const auto b = random_blocks(1, 3, 3, rng);
  const Response r{{0.4, 0.4}, {0, 0}};
  const Block payload = a[0] * b[0];
  const auto dec = decode_bivariate(build_interpolation_matrix(std::span(&r, 1), 1, 1), std::span(&payload, 1));
  EXPECT_TRUE(dec.coefficients[0] == payload);
}

TEST(Interp, DecodeUnivariate) {
  std::mt19937_64 rng(4);
  const int K = 2;
  const int L = 3;
  const auto a = random_blocks(K, 2, 3, rng);
  const auto b = random_blocks(L, 3, 2, rng);
  const auto xs = sample_distinct(static_cast<std::size_t>(K * L), rng);
  std::vector<Block> payloads;
  for (double x : xs) payloads.push_back(eval_poly_A(a, x, 0).payload * eval_upc_B(b, x, K).payload);
  const auto dec = decode_univariate(xs, payloads, K, L);
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < L; ++j) {
      EXPECT_LT((dec.coefficients[i * L + j] - a[i] * b[j]).norm(), 1e-9);
    }
  }
}

TEST(Interp, SolveCheckedFlagsSingular) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 2, 4;
  EXPECT_THROW(solve_checked(m, Eigen::MatrixXd::Identity(2, 2)), SingularSystemError);
}

TEST(Interp, DiscardPolicyCases) {
  // remainder zero
  EXPECT_EQ(discard_policy_nzo(10, 44, 5, 10), 0);
  // r_f = 4, l_e = 1, crossing the 50-cell block
  EXPECT_EQ(discard_policy_nzo(14, 44, 5, 10), 3);
  // r_f = 2, l_e = 4
  EXPECT_EQ(discard_policy_nzo(12, 41, 5, 10), 2);
  // equal remainder and gap
  EXPECT_EQ(discard_policy_nzo(13, 42, 5, 10), 0);
  // pivot ends on a row boundary
  EXPECT_EQ(discard_policy_nzo(13, 45, 5, 10), 0);
  // no block crossing
  EXPECT_EQ(discard_policy_nzo(4, 41, 5, 10), 0);
}

TEST(Interp, SelectionKeepsVerticalProfiles) {
  std::vector<DerivativeSet> sets(3);
  sets[0] = {{0.1, 0.2}, {{0, 0}, {0, 1}}};
  sets[1] = {{0.3, -0.4}, {{0, 0}}};
  sets[2] = {{-0.5, 0.6}, {{0, 0}, {0, 1}}};
  const auto sel = select_responses(sets, Scheme::BPC_VO, 2, 2, 0, 0);
  EXPECT_TRUE(sel.complete);
  EXPECT_EQ(sel.retained.size(), 4u);
  EXPECT_EQ(sel.discarded, 0);
}

TEST(Interp, SelectionIncompleteBelowKL) {
  std::vector<DerivativeSet> sets(1);
  sets[0] = {{0.1, 0.2}, {{0, 0}, {0, 1}}};
  EXPECT_FALSE(select_responses(sets, Scheme::BPC_VO, 2, 2, 0, 0).complete);
}

TEST(Interp, RegularityOfConformingVerticalSets) {
  // 4 workers x 4 cells = KL for K = L = 4
  std::vector<std::vector<Cell>> orders;
  orders.push_back(truncated_order(Scheme::BPC_VO, 4, 4, {1, 4}, 0, 0));
  orders.push_back(truncated_order(Scheme::BPC_VO, 4, 4, {2, 4}, 0, 0));
  orders.back().resize(6);
  orders.push_back(truncated_order(Scheme::BPC_VO, 4, 4, {1, 3}, 0, 0));
  orders.push_back(truncated_order(Scheme::BPC_VO, 4, 4, {1, 3}, 0, 0));
  const auto rep = check_regularity(orders, 4, 4, 1000, 99);
  EXPECT_EQ(rep.trials, 1000);
  EXPECT_EQ(rep.fraction, 1.0);
}

TEST(Interp, DuplicateOrderIsAlwaysSingular) {
  const std::vector<std::vector<Cell>> orders{{{0, 0}, {0, 0}}, {{0, 0}, {0, 1}}};
  EXPECT_EQ(check_regularity(orders, 2, 2, 50, 7).fraction, 0.0);
}

TEST(Interp, RectangularGridIsRegular) {
  const int K = 4;
  const int L = 3;
  ResponseSampler grid = [](std::mt19937_64& g) {
    const auto xs = sample_distinct(4, g);
    const auto ys = sample_distinct(3, g);
    std::vector<Response> rows;
    for (double x : xs) {
      for (double y : ys) rows.push_back({{x, y}, {0, 0}});
    }
    return rows;
  };
  EXPECT_EQ(check_regularity(grid, K, L, 500, 5).fraction, 1.0);
}

TEST(Interp, RegularityIsSeedDeterministic) {
  const std::vector<std::vector<Cell>> orders{{{0, 0}, {1, 0}}, {{0, 0}, {0, 1}}};
  const auto a = check_regularity(orders, 2, 2, 64, 11);
  const auto b = check_regularity(orders, 2, 2, 64, 11);
  EXPECT_EQ(a.nonsingular, b.nonsingular);
  EXPECT_EQ(a.min_ratio, b.min_ratio);
}

TEST(Peeling, FullSubgridDecodes) {
  GridState g(6, 5);
  for (int c = 1; c < 4; ++c) {
    for (int r = 0; r < 2; ++r) g.mark(c, r);
  }
  const auto res = bproc_peel(g, 3, 2);
  EXPECT_TRUE(res.decodable);
}

TEST(Peeling, HundredTenCellInstanceIsNotDecodable) {
  // 15 x 15 grid, K = L = 10: seven full columns plus five scattered cells
  GridState g(15, 15);
  for (int c = 0; c < 7; ++c) {
    for (int r = 0; r < 15; ++r) g.mark(c, r);
  }
  const std::pair<int, int> extra[] = {{7, 0}, {8, 3}, {9, 6}, {10, 9}, {11, 12}};
  for (auto [c, r] : extra) g.mark(c, r);
  ASSERT_EQ(g.received(), 110);
  EXPECT_FALSE(bproc_peel(g, 10, 10).decodable);
}

TEST(Peeling, WorstCaseThreshold) {
  GridState g(15, 15);
  for (int c = 0; c < 9; ++c) {
    for (int r = 0; r < 15; ++r) g.mark(c, r);
  }
  for (int r = 0; r < 9; ++r) {
    for (int c = 9; c < 15; ++c) g.mark(c, r);
  }
  ASSERT_EQ(g.received(), 189);
  EXPECT_FALSE(bproc_peel(g, 10, 10).decodable);
  g.mark(14, 14);
  const auto res = bproc_peel(g, 10, 10);
  EXPECT_EQ(g.received(), 190);
  EXPECT_TRUE(res.decodable);
}

TEST(Peeling, IncrementalMatchesBatchAndIsMonotone) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int cols = 12;
    const int rows = 9;
    std::vector<std::pair<int, int>> cells;
    for (int c = 0; c < cols; ++c) {
      for (int r = 0; r < rows; ++r) cells.emplace_back(c, r);
    }
    std::shuffle(cells.begin(), cells.end(), rng);
    GridState inc(cols, rows);
    GridState batch(cols, rows);
    bool was = false;
    for (auto [c, r] : cells) {
      inc.receive(c, r, 6, 5);
      batch.mark(c, r);
      batch.peel(6, 5);
      EXPECT_EQ(inc.decodable(6), batch.decodable(6));
      EXPECT_EQ(inc.decoded_columns(), batch.decoded_columns());
      if (was) {
        EXPECT_TRUE(inc.decodable(6));
      }
      was = inc.decodable(6);
    }
  }
}

TEST(Peeling, NumericDecodeMatchesProduct) {
  std::mt19937_64 rng(41);
  const int K = 3;
  const int L = 2;
  const auto a = random_blocks(K, 2, 3, rng);
  const auto b = random_blocks(L, 3, 2, rng);
  const auto xs = sample_distinct(5, rng);
  const auto ys = sample_distinct(4, rng);
  std::vector<std::optional<Block>> values(xs.size() * ys.size());
  // two full columns, the other columns hold exactly L cells each
  for (std::size_t c = 0; c < xs.size(); ++c) {
    for (std::size_t r = 0; r < ys.size(); ++r) {
      if (c < 2 || r < 2) {
        values[c * ys.size() + r] = eval_poly_A(a, xs[c], 0).payload * eval_poly_B(b, ys[r], 0).payload;
      }
    }
  }
  const auto dec = decode_bproc(xs, ys, values, K, L);
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < L; ++j) EXPECT_LT((dec.coefficients[i * L + j] - a[i] * b[j]).norm(), 1e-9);
  }
  std::vector<std::optional<Block>> sparse(xs.size() * ys.size());
  sparse[0] = values[0];
  EXPECT_THROW(decode_bproc(xs, ys, sparse, K, L), SingularSystemError);
}

TEST(Interp, EquilibrationIsExactPowerOfTwoScaling) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(5, 5);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  m.row(2) *= 1e9;
  m.col(4) *= 1e-7;
  const auto e = equilibrate(m);
  EXPECT_EQ(e.scaled, Eigen::MatrixXd(e.row.asDiagonal() * m * e.col.asDiagonal()));
  int exp = 0;
  for (Eigen::Index i = 0; i < 5; ++i) {
    EXPECT_EQ(std::frexp(e.row(i), &exp), 0.5);
    EXPECT_EQ(std::frexp(e.col(i), &exp), 0.5);
    EXPECT_GE(e.scaled.row(i).cwiseAbs().maxCoeff(), 0.5);
    EXPECT_LT(e.scaled.row(i).cwiseAbs().maxCoeff(), 2.0);
    EXPECT_GE(e.scaled.col(i).cwiseAbs().maxCoeff(), 0.5);
    EXPECT_LT(e.scaled.col(i).cwiseAbs().maxCoeff(), 2.0);
  }
  // bad scaling hides a well-posed system from the raw ratio only
  EXPECT_LT(raw_singular_value_ratio(m), 1e-12);
  EXPECT_GT(singular_value_ratio(m), 1e-6);
}

TEST(Interp, RankDeficientStaysSingularAfterEquilibration) {
  Eigen::MatrixXd m(3, 3);
  m << 1, 2, 3, 2, 4, 6, 1, 0, 1;
  EXPECT_LT(singular_value_ratio(m), kSingularityThreshold);
}
