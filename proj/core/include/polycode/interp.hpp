#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "polycode/matrix.hpp"
#include "polycode/schemes.hpp"

namespace polycode {

/// Relative smallest singular value below which a system counts as singular.
inline constexpr double kSingularityThreshold = 1e-12;

struct EvalPoint {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const EvalPoint&, const EvalPoint&) = default;
};

/// One received computation: the (k,l) mixed partial of A(x)B(y) at a point.
struct Response {
  EvalPoint point;
  Cell order;
};

/// Derivative orders delivered for one evaluation point, in arrival order.
struct DerivativeSet {
  EvalPoint point;
  std::vector<Cell> orders;
};

struct InterpolationSystem {
  int K = 1;
  int L = 1;
  std::vector<Response> rows;
  Eigen::MatrixXd matrix;  // KL x KL, column a*L + b <-> monomial x^a y^b
};

class DuplicateRowError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SingularSystemError : public std::runtime_error {
 public:
  SingularSystemError(const std::string& what, double ratio)
      : std::runtime_error(what), singular_value_ratio_(ratio) {}
  double singular_value_ratio() const { return singular_value_ratio_; }

 private:
  double singular_value_ratio_;
};

/// Row of the interpolation matrix for the (k,l) derivative at p.
Eigen::RowVectorXd interpolation_row(const EvalPoint& p, Cell order, int K, int L);

/// Requires exactly K*L rows with pairwise distinct (point, order).
InterpolationSystem build_interpolation_matrix(std::span<const Response> responses, int K, int L);

/// Power-of-two diagonal scalings D_r, D_c such that every row and column of
/// D_r * m * D_c has its largest magnitude in [0.5, 2]. Powers of two keep the
/// scaling exact in floating point.
struct Equilibration {
  Eigen::VectorXd row;
  Eigen::VectorXd col;
  Eigen::MatrixXd scaled;
};

Equilibration equilibrate(const Eigen::MatrixXd& m);

/// sigma_min / sigma_max of the equilibrated matrix; 0 for an empty or
/// rank-deficient matrix. Derivative rows carry k! l! factors and monomial
/// columns span many magnitudes, none of which affect solvability.
double singular_value_ratio(const Eigen::MatrixXd& m);

/// Same ratio computed on m as given, without equilibration.
double raw_singular_value_ratio(const Eigen::MatrixXd& m);

struct DecodeResult {
  std::vector<Block> coefficients;  // A_i B_j at index i*L + j
  double singular_value_ratio = 0.0;
  double condition_number = 0.0;
};

/// Solves M X = R once for all (r/K)(c/L) right-hand sides. payloads[t] is
/// the response of system.rows[t].
DecodeResult decode_bivariate(const InterpolationSystem& system, std::span<const Block> payloads);

/// Univariate polynomial-code decoding: payloads[t] = A(x_t) B(x_t) where B
/// uses the x^{(j-1)K} stride. Needs exactly K*L distinct points.
DecodeResult decode_univariate(std::span<const double> points, std::span<const Block> payloads,
                               int K, int L);

/// Dense solve shared by the decoders; throws SingularSystemError.
Eigen::MatrixXd solve_checked(const Eigen::MatrixXd& m, const Eigen::MatrixXd& rhs,
                              double* ratio_out = nullptr, double* cond_out = nullptr);

/// Number of computations of the variable node to ignore so that coalescing
/// it into the pivot keeps a quasi-unique shift. mu is the zig-zag block size
/// (mu_B for N-zig-zag) and span the block length along the other axis (K).
int discard_policy_nzo(int variable_size, int pivot_size, int mu, int span);

struct Selection {
  std::vector<Response> retained;                // exactly K*L when complete
  std::vector<std::pair<int, int>> source;       // (set index, position) per retained row
  int discarded = 0;                             // ignored by the policy
  int unused = 0;                                // beyond K*L after the last coalescence
  bool complete = false;
};

/// Greedy coalescence over derivative sets (descending size) for the Hermite
/// schemes. VO/HO keep any K*L; NZO/ZZO apply discard_policy_nzo at every
/// step.
Selection select_responses(std::span<const DerivativeSet> sets, Scheme scheme, int K, int L,
                           int mu_a, int mu_b);

struct RegularityReport {
  int trials = 0;
  int nonsingular = 0;
  double fraction = 0.0;
  double min_ratio = 0.0;  // smallest sigma_min/sigma_max seen
};

using ResponseSampler = std::function<std::vector<Response>(std::mt19937_64&)>;

/// Runs `trials` independent draws, each with its own generator derived from
/// (seed, trial), and reports how many interpolation matrices are nonsingular.
RegularityReport check_regularity(const ResponseSampler& sampler, int K, int L, int trials,
                                  std::uint64_t seed);

/// Derivative-set form: orders[i] is worker i's multiset; each trial draws a
/// fresh point per worker with sample_stratified on each coordinate.
RegularityReport check_regularity(const std::vector<std::vector<Cell>>& orders, int K, int L,
                                  int trials, std::uint64_t seed);

/// Distinct values uniform in [-1, 1].
std::vector<double> sample_distinct(std::size_t n, std::mt19937_64& rng);

/// n random values in [-1, 1], one per equal-width stratum in shuffled order,
/// each uniform in the middle half of its stratum. Hermite systems with many
/// derivatives lose rank numerically when two workers share almost the same
/// coordinate, and this keeps every pair of coordinates at least 1/n apart.
std::vector<double> sample_stratified(std::size_t n, std::mt19937_64& rng);

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// ---------------------------------------------------------------------------
// B-PROC rectangular grid

/// Known cells of the (n_A m_A) x (n_B m_B) evaluation grid. Column c holds
/// x_c, row r holds y_r.
class GridState {
 public:
  GridState(int columns, int rows);

  int columns() const { return columns_; }
  int rows() const { return rows_; }
  bool known(int col, int row) const { return known_[index(col, row)] != 0; }
  bool column_decoded(int col) const { return col_decoded_[col] != 0; }
  bool row_decoded(int row) const { return row_decoded_[row] != 0; }
  int decoded_columns() const { return decoded_cols_; }
  int decoded_rows() const { return decoded_rows_; }
  int received() const { return received_; }

  /// Marks a received cell; returns false when it was already known.
  bool mark(int col, int row);

  /// Runs peeling to its fixpoint. A column needs L known cells, a row K.
  void peel(int K, int L);

  /// mark() followed by incremental peeling from the touched lines.
  bool receive(int col, int row, int K, int L);

  bool decodable(int K) const { return decoded_cols_ >= K; }

 private:
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(col) * static_cast<std::size_t>(rows_) +
           static_cast<std::size_t>(row);
  }
  void set_known(int col, int row);
  void drain(int K, int L);

  int columns_;
  int rows_;
  std::vector<std::uint8_t> known_;
  std::vector<int> col_count_;
  std::vector<int> row_count_;
  std::vector<std::uint8_t> col_decoded_;
  std::vector<std::uint8_t> row_decoded_;
  int decoded_cols_ = 0;
  int decoded_rows_ = 0;
  int received_ = 0;
  std::vector<int> pending_cols_;
  std::vector<int> pending_rows_;
};

struct PeelResult {
  bool decodable = false;
  int useful = 0;
  int decoded_columns = 0;
  int decoded_rows = 0;
};

PeelResult bproc_peel(GridState& state, int K, int L);

/// Numeric B-PROC decode by line-wise univariate interpolation followed by a
/// K x L tensor-grid solve. values[col * ys.size() + row] holds received cells.
DecodeResult decode_bproc(std::span<const double> xs, std::span<const double> ys,
                          std::vector<std::optional<Block>> values, int K, int L);

}  // namespace polycode
