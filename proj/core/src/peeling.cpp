#include <algorithm>

#include "polycode/interp.hpp"

namespace polycode {

GridState::GridState(int columns, int rows)
    : columns_(columns),
      rows_(rows),
      known_(static_cast<std::size_t>(std::max(columns, 0)) * static_cast<std::size_t>(std::max(rows, 0)), 0),
      col_count_(static_cast<std::size_t>(std::max(columns, 0)), 0),
      row_count_(static_cast<std::size_t>(std::max(rows, 0)), 0),
      col_decoded_(static_cast<std::size_t>(std::max(columns, 0)), 0),
      row_decoded_(static_cast<std::size_t>(std::max(rows, 0)), 0) {
  if (columns < 1 || rows < 1) throw DimensionError("GridState: grid must be non-empty");
}

void GridState::set_known(int col, int row) {
  known_[index(col, row)] = 1;
  ++col_count_[static_cast<std::size_t>(col)];
  ++row_count_[static_cast<std::size_t>(row)];
  pending_cols_.push_back(col);
  pending_rows_.push_back(row);
}

bool GridState::mark(int col, int row) {
  if (col < 0 || col >= columns_ || row < 0 || row >= rows_) {
    throw std::out_of_range("GridState: cell outside the grid");
  }
  if (known(col, row)) return false;
  ++received_;
  set_known(col, row);
  return true;
}

void GridState::drain(int K, int L) {
  while (!pending_cols_.empty() || !pending_rows_.empty()) {
    if (!pending_cols_.empty()) {
      const int c = pending_cols_.back();
      pending_cols_.pop_back();
      if (col_decoded_[static_cast<std::size_t>(c)] || col_count_[static_cast<std::size_t>(c)] < L) continue;
      col_decoded_[static_cast<std::size_t>(c)] = 1;
      ++decoded_cols_;
      for (int r = 0; r < rows_; ++r) {
        if (!known(c, r)) set_known(c, r);
      }
      continue;
    }
    const int r = pending_rows_.back();
    pending_rows_.pop_back();
    if (row_decoded_[static_cast<std::size_t>(r)] || row_count_[static_cast<std::size_t>(r)] < K) continue;
    row_decoded_[static_cast<std::size_t>(r)] = 1;
    ++decoded_rows_;
    for (int c = 0; c < columns_; ++c) {
      if (!known(c, r)) set_known(c, r);
    }
  }
}

void GridState::peel(int K, int L) {
  for (int c = 0; c < columns_; ++c) pending_cols_.push_back(c);
  for (int r = 0; r < rows_; ++r) pending_rows_.push_back(r);
  drain(K, L);
}

bool GridState::receive(int col, int row, int K, int L) {
  const bool fresh = mark(col, row);
  drain(K, L);
  return fresh;
}

PeelResult bproc_peel(GridState& state, int K, int L) {
  state.peel(K, L);
  PeelResult res;
  res.decodable = state.decodable(K);
  res.decoded_columns = state.decoded_columns();
  res.decoded_rows = state.decoded_rows();
  res.useful = res.decodable ? std::min(state.received(), K * L) : state.received();
  return res;
}

namespace {

// Fits the degree-(n-1) polynomial through (nodes[t], vals[t]) and evaluates
// it at `at`.
Block univariate_fill(const std::vector<double>& nodes, const std::vector<const Block*>& vals,
                      double at) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd v(n, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    double p = 1.0;
    for (Eigen::Index e = 0; e < n; ++e) {
      v(t, e) = p;
      p *= nodes[static_cast<std::size_t>(t)];
    }
  }
  const Block& first = *vals.front();
  Eigen::MatrixXd rhs(n, first.size());
  for (Eigen::Index t = 0; t < n; ++t) {
    rhs.row(t) = Eigen::Map<const Eigen::RowVectorXd>(vals[static_cast<std::size_t>(t)]->data(), first.size());
  }
  const Eigen::MatrixXd coeffs = solve_checked(v, rhs);
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(first.size());
  for (Eigen::Index e = n; e-- > 0;) acc = acc * at + coeffs.row(e);
  Block out(first.rows(), first.cols());
  Eigen::Map<Eigen::RowVectorXd>(out.data(), out.size()) = acc;
  return out;
}

}  // namespace

DecodeResult decode_bproc(std::span<const double> xs, std::span<const double> ys,
                          std::vector<std::optional<Block>> values, int K, int L) {
  const int cols = static_cast<int>(xs.size());
  const int rows = static_cast<int>(ys.size());
  if (values.size() != xs.size() * ys.size()) {
    throw DimensionError("decode_bproc: value grid does not match the point lists");
  }
  auto at = [&](int c, int r) -> std::optional<Block>& {
    return values[static_cast<std::size_t>(c) * static_cast<std::size_t>(rows) + static_cast<std::size_t>(r)];
  };

  bool progress = true;
  while (progress) {
    progress = false;
    for (int c = 0; c < cols; ++c) {
      std::vector<double> nodes;
      std::vector<const Block*> vals;
      int missing = 0;
      for (int r = 0; r < rows; ++r) {
        if (at(c, r)) {
          if (static_cast<int>(nodes.size()) < L) {
            nodes.push_back(ys[static_cast<std::size_t>(r)]);
            vals.push_back(&*at(c, r));
          }
        } else {
          ++missing;
        }
      }
      if (missing == 0 || static_cast<int>(nodes.size()) < L) continue;
      std::vector<std::pair<int, Block>> filled;
      for (int r = 0; r < rows; ++r) {
        if (!at(c, r)) filled.emplace_back(r, univariate_fill(nodes, vals, ys[static_cast<std::size_t>(r)]));
      }
      for (auto& [r, b] : filled) at(c, r) = std::move(b);
      progress = true;
    }
    for (int r = 0; r < rows; ++r) {
      std::vector<double> nodes;
      std::vector<const Block*> vals;
      int missing = 0;
      for (int c = 0; c < cols; ++c) {
        if (at(c, r)) {
          if (static_cast<int>(nodes.size()) < K) {
            nodes.push_back(xs[static_cast<std::size_t>(c)]);
            vals.push_back(&*at(c, r));
          }
        } else {
          ++missing;
        }
      }
      if (missing == 0 || static_cast<int>(nodes.size()) < K) continue;
      std::vector<std::pair<int, Block>> filled;
      for (int c = 0; c < cols; ++c) {
        if (!at(c, r)) filled.emplace_back(c, univariate_fill(nodes, vals, xs[static_cast<std::size_t>(c)]));
      }
      for (auto& [c, b] : filled) at(c, r) = std::move(b);
      progress = true;
    }
  }

  std::vector<int> full_cols;
  for (int c = 0; c < cols && static_cast<int>(full_cols.size()) < K; ++c) {
    bool full = true;
    for (int r = 0; r < rows && full; ++r) full = at(c, r).has_value();
    if (full) full_cols.push_back(c);
  }
  if (static_cast<int>(full_cols.size()) < K || rows < L) {
    throw SingularSystemError("decode_bproc: received grid cells are not decodable by peeling", 0.0);
  }
  std::vector<Response> responses;
  std::vector<Block> payloads;
  for (int c : full_cols) {
    for (int r = 0; r < L; ++r) {
      responses.push_back({{xs[static_cast<std::size_t>(c)], ys[static_cast<std::size_t>(r)]}, {0, 0}});
      payloads.push_back(*at(c, r));
    }
  }
  return decode_bivariate(build_interpolation_matrix(responses, K, L), payloads);
}

}  // namespace polycode
