#include "polycode/encoding.hpp"

#include <cmath>
#include <string>

namespace polycode {

double falling_factorial(int n, int d) {
  if (d < 0 || d > n) return 0.0;
  double out = 1.0;
  for (int t = 0; t < d; ++t) out *= static_cast<double>(n - t);
  return out;
}

namespace {

// sum_{i >= d} [i!/(i-d)!] P_i t^{i-d} with 0-based i, evaluated by Horner.
Block eval_derivative(std::span<const Block> blocks, double t, int d, const char* name) {
  const int degree_plus_one = static_cast<int>(blocks.size());
  if (degree_plus_one == 0) throw DimensionError(std::string(name) + ": no partitions");
  if (d < 0 || d >= degree_plus_one) {
    throw std::out_of_range(std::string(name) + ": derivative order " + std::to_string(d) +
                            " outside [0, " + std::to_string(degree_plus_one - 1) + "]");
  }
  const auto& first = blocks.front();
  Block acc = Block::Zero(first.rows(), first.cols());
  for (int i = degree_plus_one - 1; i >= d; --i) {
    if (blocks[i].rows() != first.rows() || blocks[i].cols() != first.cols()) {
      throw DimensionError(std::string(name) + ": partitions differ in shape");
    }
    acc = acc * t + falling_factorial(i, d) * blocks[i];
  }
  return acc;
}

}  // namespace

CodedBlock eval_poly_A(std::span<const Block> blocks, double x, int d) {
  return {Side::A, d, x, eval_derivative(blocks, x, d, "eval_poly_A")};
}

CodedBlock eval_poly_B(std::span<const Block> blocks, double y, int d) {
  return {Side::B, d, y, eval_derivative(blocks, y, d, "eval_poly_B")};
}

CodedBlock eval_upc_B(std::span<const Block> blocks, double x, std::size_t K) {
  if (blocks.empty()) throw DimensionError("eval_upc_B: no partitions");
  if (K == 0) throw DimensionError("eval_upc_B: K must be positive");
  const double step = std::pow(x, static_cast<double>(K));
  const auto& first = blocks.front();
  Block acc = Block::Zero(first.rows(), first.cols());
  for (std::size_t j = blocks.size(); j-- > 0;) {
    if (blocks[j].rows() != first.rows() || blocks[j].cols() != first.cols()) {
      throw DimensionError("eval_upc_B: partitions differ in shape");
    }
    acc = acc * step + blocks[j];
  }
  return {Side::B, 0, x, std::move(acc)};
}

Block partial_product(const CodedBlock& a, const CodedBlock& b) {
  if (a.side != Side::A || b.side != Side::B) {
    throw std::invalid_argument("partial_product: expects an A-side and a B-side block");
  }
  if (a.payload.cols() != b.payload.rows()) {
    throw DimensionError("partial_product: inner dimensions differ");
  }
  return a.payload * b.payload;
}

}  // namespace polycode
