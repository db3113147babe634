#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace polycode {

/// Dense row-major block of doubles; every payload in the library uses it.
using Block = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Geometry shared by every scheme: A is r x s, B is s x c, A is cut into K
/// row bands and B into L column bands.
struct PartitionPlan {
  std::size_t r = 1;
  std::size_t s = 1;
  std::size_t c = 1;
  std::size_t K = 1;
  std::size_t L = 1;

  /// Throws DimensionError unless K | r and L | c with K, L >= 1.
  void validate() const;

  std::size_t block_rows() const { return r / K; }  // rows of an A-partition
  std::size_t block_cols() const { return c / L; }  // columns of a B-partition
  std::size_t products() const { return K * L; }
};

struct Partitions {
  std::vector<Block> a;  // K blocks, (r/K) x s
  std::vector<Block> b;  // L blocks, s x (c/L)
};

Partitions partition(const Block& A, const Block& B, const PartitionPlan& plan);

/// Inverse of partition(): vertical stack of a-blocks, horizontal concat of b-blocks.
Block stack_rows(const std::vector<Block>& blocks);
Block concat_cols(const std::vector<Block>& blocks);

/// Reassembles AB from the K*L coefficient blocks A_i B_j stored at index i*L + j.
Block assemble_product(const std::vector<Block>& coefficients, const PartitionPlan& plan);

double relative_frobenius_error(const Block& approx, const Block& exact);

}  // namespace polycode
