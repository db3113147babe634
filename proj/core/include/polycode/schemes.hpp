#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "polycode/matrix.hpp"
#include "polycode/rational.hpp"

namespace polycode {

enum class Scheme { UPC, UPC_PC, B_PROC, BPC_VO, BPC_HO, BPC_NZO, BPC_ZZO, LOWER_BOUND };

inline constexpr Scheme kAllSchemes[] = {Scheme::UPC,    Scheme::UPC_PC,  Scheme::B_PROC,
                                         Scheme::BPC_VO, Scheme::BPC_HO,  Scheme::BPC_NZO,
                                         Scheme::BPC_ZZO, Scheme::LOWER_BOUND};

std::string_view to_string(Scheme s);
/// Accepts the canonical names ("BPC-NZO", "UPC-PC", "LOWER-BOUND", ...).
Scheme parse_scheme(std::string_view name);

bool is_bivariate_hermite(Scheme s);  // VO, HO, NZO, ZZO

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InfeasibleBudget : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Position in the K x L derivative order space: k-th derivative of A(x),
/// l-th derivative of B(y). B-PROC reuses it for (A-point, B-point) indices
/// inside a worker, UPC-PC for (j, j).
struct Cell {
  int k = 0;
  int l = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct Storage {
  int m_a = 1;
  int m_b = 1;
  friend bool operator==(const Storage&, const Storage&) = default;
};

struct SchemeConfig {
  Scheme scheme = Scheme::BPC_VO;
  PartitionPlan plan;
  int workers = 1;
  std::vector<Storage> storage;  // one entry per worker
  int mu_a = 0;                  // BPC-ZZO block width
  int mu_b = 0;                  // BPC-NZO block height
  int n_a = 0;                   // B-PROC grid factors
  int n_b = 0;

  int K() const { return static_cast<int>(plan.K); }
  int L() const { return static_cast<int>(plan.L); }
};

/// Homogeneous config: every worker gets the same storage.
SchemeConfig make_homogeneous(Scheme scheme, const PartitionPlan& plan, int workers, Storage st,
                              int mu_a = 0, int mu_b = 0, int n_a = 0, int n_b = 0);

/// Per-worker system constraint of the scheme (no budget involved).
bool storage_admissible(Scheme scheme, int K, int L, Storage st, int mu_a, int mu_b);

/// Throws ConfigError describing the first violated constraint.
void validate(const SchemeConfig& cfg);

/// Full priority order of the K x L derivative order space for the Hermite
/// schemes (vertical, horizontal, N-zig-zag, Z-zig-zag).
std::vector<Cell> priority_sequence(Scheme scheme, int K, int L, int mu_a, int mu_b);

/// Priority sequence cut at the first cell the worker cannot compute.
std::vector<Cell> truncated_order(Scheme scheme, int K, int L, Storage st, int mu_a, int mu_b);

/// Ordered list of computations worker i executes. B-PROC workers shuffle
/// their m_A x m_B grid when rng is supplied.
std::vector<Cell> computation_order(const SchemeConfig& cfg, int worker,
                                    std::mt19937_64* rng = nullptr);

/// Maximum number of usable computations of worker i.
int eta(const SchemeConfig& cfg, int worker);

/// Worst-case recovery threshold (B-PROC: grid worst case).
std::int64_t recovery_threshold(const SchemeConfig& cfg);

/// Number of arrivals after which the master stops; nullopt for B-PROC whose
/// stop depends on the peeling state.
std::optional<std::int64_t> fixed_stop_count(const SchemeConfig& cfg);

struct Metrics {
  Rational c_part;
  std::vector<Rational> c_max;  // per worker
  Rational c_wasted;
};

Metrics metrics(const SchemeConfig& cfg);

struct AllocationParams {
  int workers = 1;
  int mu_a = 0;
  int mu_b = 0;
  int n_a = 0;  // B-PROC; 0 lets the allocator pick the factorization
  int n_b = 0;
};

struct Allocation {
  Storage storage;
  int eta = 0;
  int n_a = 0;
  int n_b = 0;
};

/// Storage split maximizing eta under m_A (r/K) + m_B (c/L) <= budget and the
/// scheme's constraints. Ties: larger m_A + m_B, then larger m_B for
/// vertical-type schemes and larger m_A for horizontal-type ones.
Allocation allocate_storage(Scheme scheme, const PartitionPlan& plan, std::int64_t budget,
                            const AllocationParams& params);

}  // namespace polycode
