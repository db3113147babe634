#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "polycode/interp.hpp"
#include "polycode/schemes.hpp"

namespace polycode::cli {

/// A random arrival profile: per-worker order prefixes that the master has
/// received when it starts decoding.
struct ArrivalProfile {
  std::vector<Storage> storage;
  std::vector<std::vector<Cell>> received;  // prefix of each worker's order
  int arrivals = 0;
};

/// Admissible (m_A, m_B) pairs for a scheme with the given K, L, mu.
std::vector<Storage> admissible_storages(Scheme scheme, int K, int L, int mu_a, int mu_b);

/// Draws heterogeneous admissible storage for `workers` workers (redrawn
/// until the total capacity reaches `needed`), then interleaves the workers'
/// orders uniformly at random until `needed` computations have arrived.
ArrivalProfile random_profile(Scheme scheme, int K, int L, int workers, int mu_a, int mu_b,
                              std::int64_t needed, std::mt19937_64& rng);

/// Like random_profile, but stops as soon as the greedy discard selection is
/// complete (NZO/ZZO) instead of at a fixed count.
ArrivalProfile random_profile_until_selectable(Scheme scheme, int K, int L, int workers, int mu_a,
                                               int mu_b, std::mt19937_64& rng);

/// Order-violating profile: every worker delivers a random subset of cells
/// in random order, KL computations in total.
ArrivalProfile random_unordered_profile(int K, int L, int workers, std::mt19937_64& rng);

/// Attaches distinct uniform points to the profile's derivative sets.
std::vector<DerivativeSet> attach_points(const ArrivalProfile& profile, std::mt19937_64& rng);

}  // namespace polycode::cli
