#include "polycode/matrix.hpp"

namespace polycode {

void PartitionPlan::validate() const {
  if (K == 0 || L == 0) {
    throw DimensionError("partition counts K and L must be positive");
  }
  if (r == 0 || s == 0 || c == 0) {
    throw DimensionError("matrix dimensions must be positive");
  }
  if (r % K != 0) {
    throw DimensionError("K=" + std::to_string(K) + " does not divide r=" + std::to_string(r));
  }
  if (c % L != 0) {
    throw DimensionError("L=" + std::to_string(L) + " does not divide c=" + std::to_string(c));
  }
}

Partitions partition(const Block& A, const Block& B, const PartitionPlan& plan) {
  plan.validate();
  if (static_cast<std::size_t>(A.rows()) != plan.r || static_cast<std::size_t>(A.cols()) != plan.s) {
    throw DimensionError("A does not have shape r x s");
  }
  if (static_cast<std::size_t>(B.rows()) != plan.s || static_cast<std::size_t>(B.cols()) != plan.c) {
    throw DimensionError("B does not have shape s x c");
  }
  const auto br = static_cast<Eigen::Index>(plan.block_rows());
  const auto bc = static_cast<Eigen::Index>(plan.block_cols());
  Partitions out;
  out.a.reserve(plan.K);
  out.b.reserve(plan.L);
  for (std::size_t i = 0; i < plan.K; ++i) {
    out.a.emplace_back(A.middleRows(static_cast<Eigen::Index>(i) * br, br));
  }
  for (std::size_t j = 0; j < plan.L; ++j) {
    out.b.emplace_back(B.middleCols(static_cast<Eigen::Index>(j) * bc, bc));
  }
  return out;
}

Block stack_rows(const std::vector<Block>& blocks) {
  if (blocks.empty()) return {};
  Eigen::Index rows = 0;
  for (const auto& b : blocks) rows += b.rows();
  Block out(rows, blocks.front().cols());
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    if (b.cols() != out.cols()) throw DimensionError("stack_rows: column mismatch");
    out.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  return out;
}

Block concat_cols(const std::vector<Block>& blocks) {
  if (blocks.empty()) return {};
  Eigen::Index cols = 0;
  for (const auto& b : blocks) cols += b.cols();
  Block out(blocks.front().rows(), cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    if (b.rows() != out.rows()) throw DimensionError("concat_cols: row mismatch");
    out.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return out;
}

Block assemble_product(const std::vector<Block>& coefficients, const PartitionPlan& plan) {
  if (coefficients.size() != plan.products()) {
    throw DimensionError("assemble_product: expected K*L coefficient blocks");
  }
  const auto br = static_cast<Eigen::Index>(plan.block_rows());
  const auto bc = static_cast<Eigen::Index>(plan.block_cols());
  Block out(static_cast<Eigen::Index>(plan.r), static_cast<Eigen::Index>(plan.c));
  for (std::size_t i = 0; i < plan.K; ++i) {
    for (std::size_t j = 0; j < plan.L; ++j) {
      const Block& blk = coefficients[i * plan.L + j];
      if (blk.rows() != br || blk.cols() != bc) {
        throw DimensionError("assemble_product: coefficient block has wrong shape");
      }
      out.block(static_cast<Eigen::Index>(i) * br, static_cast<Eigen::Index>(j) * bc, br, bc) = blk;
    }
  }
  return out;
}

double relative_frobenius_error(const Block& approx, const Block& exact) {
  if (approx.rows() != exact.rows() || approx.cols() != exact.cols()) {
    throw DimensionError("relative_frobenius_error: shape mismatch");
  }
  const double denom = exact.norm();
  const double diff = (approx - exact).norm();
  return denom == 0.0 ? diff : diff / denom;
}

}  // namespace polycode
