#pragma once

#include <span>

#include "polycode/matrix.hpp"

namespace polycode {

enum class Side { A, B };

/// One coded partition shipped to a worker: a derivative of A(x) or B(y)
/// evaluated at a single point.
struct CodedBlock {
  Side side = Side::A;
  int derivative_order = 0;
  double eval_point = 0.0;
  Block payload;
};

/// n! / (n - d)!, zero when d > n.
double falling_factorial(int n, int d);

/// d-th derivative of A(x) = A_1 + A_2 x + ... + A_K x^{K-1} at x.
CodedBlock eval_poly_A(std::span<const Block> blocks, double x, int d);

/// d-th derivative of B(y) = B_1 + B_2 y + ... + B_L y^{L-1} at y.
CodedBlock eval_poly_B(std::span<const Block> blocks, double y, int d);

/// Univariate polynomial-code encoding of B: sum_j B_j x^{(j-1)K}.
CodedBlock eval_upc_B(std::span<const Block> blocks, double x, std::size_t K);

/// payload(a) * payload(b); equals the (k,l) mixed partial of A(x)B(y).
Block partial_product(const CodedBlock& a, const CodedBlock& b);

}  // namespace polycode
