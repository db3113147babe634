#include "profiles.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace polycode::cli {

std::vector<Storage> admissible_storages(Scheme scheme, int K, int L, int mu_a, int mu_b) {
  std::vector<Storage> out;
  for (int ma = 1; ma <= K; ++ma) {
    for (int mb = 1; mb <= L; ++mb) {
      if (storage_admissible(scheme, K, L, {ma, mb}, mu_a, mu_b)) out.push_back({ma, mb});
    }
  }
  return out;
}

namespace {

struct Workers {
  std::vector<Storage> storage;
  std::vector<std::vector<Cell>> orders;
};

Workers draw_workers(Scheme scheme, int K, int L, int workers, int mu_a, int mu_b, std::int64_t needed,
                     std::mt19937_64& rng) {
  const auto choices = admissible_storages(scheme, K, L, mu_a, mu_b);
  if (choices.empty()) throw std::invalid_argument("random_profile: no admissible storage");
  std::uniform_int_distribution<std::size_t> pick(0, choices.size() - 1);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Workers w;
    std::int64_t capacity = 0;
    for (int i = 0; i < workers; ++i) {
      const Storage st = choices[pick(rng)];
      w.storage.push_back(st);
      w.orders.push_back(truncated_order(scheme, K, L, st, mu_a, mu_b));
      capacity += static_cast<std::int64_t>(w.orders.back().size());
    }
    if (capacity >= needed) return w;
  }
  throw std::invalid_argument("random_profile: worker count too small for the requested arrivals");
}

// Appends one arrival from a uniformly chosen worker that still has work.
bool step(const Workers& w, ArrivalProfile& p, std::mt19937_64& rng) {
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < w.orders.size(); ++i) {
    if (p.received[i].size() < w.orders[i].size()) live.push_back(i);
  }
  if (live.empty()) return false;
  const std::size_t i = live[std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng)];
  p.received[i].push_back(w.orders[i][p.received[i].size()]);
  ++p.arrivals;
  return true;
}

}  // namespace

ArrivalProfile random_profile(Scheme scheme, int K, int L, int workers, int mu_a, int mu_b,
                              std::int64_t needed, std::mt19937_64& rng) {
  const Workers w = draw_workers(scheme, K, L, workers, mu_a, mu_b, needed, rng);
  ArrivalProfile p;
  p.storage = w.storage;
  p.received.resize(w.orders.size());
  while (p.arrivals < needed && step(w, p, rng)) {
  }
  return p;
}

ArrivalProfile random_profile_until_selectable(Scheme scheme, int K, int L, int workers, int mu_a,
                                               int mu_b, std::mt19937_64& rng) {
  const SchemeConfig probe = make_homogeneous(scheme, PartitionPlan{static_cast<std::size_t>(K), 1,
                                                                    static_cast<std::size_t>(L),
                                                                    static_cast<std::size_t>(K),
                                                                    static_cast<std::size_t>(L)},
                                              1, {1, 1}, mu_a, mu_b);
  const Workers w = draw_workers(scheme, K, L, workers, mu_a, mu_b, recovery_threshold(probe), rng);
  ArrivalProfile p;
  p.storage = w.storage;
  p.received.resize(w.orders.size());
  std::vector<DerivativeSet> sets(w.orders.size());
  while (step(w, p, rng)) {
    if (p.arrivals < K * L) continue;
    for (std::size_t i = 0; i < sets.size(); ++i) sets[i].orders = p.received[i];
    if (select_responses(sets, scheme, K, L, mu_a, mu_b).complete) break;
  }
  return p;
}

ArrivalProfile random_unordered_profile(int K, int L, int workers, std::mt19937_64& rng) {
  ArrivalProfile p;
  p.received.resize(static_cast<std::size_t>(workers));
  std::vector<Cell> all;
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) all.push_back({k, l});
  }
  std::uniform_int_distribution<int> who(0, workers - 1);
  // each worker draws from its own shuffled copy so no cell repeats per point
  std::vector<std::vector<Cell>> pools(static_cast<std::size_t>(workers), all);
  for (auto& pool : pools) std::shuffle(pool.begin(), pool.end(), rng);
  while (p.arrivals < K * L) {
    auto& pool = pools[static_cast<std::size_t>(who(rng))];
    auto& got = p.received[static_cast<std::size_t>(&pool - pools.data())];
    if (got.size() == pool.size()) continue;
    got.push_back(pool[got.size()]);
    ++p.arrivals;
  }
  for (const auto& got : p.received) {
    const int m = static_cast<int>(got.size());
    p.storage.push_back({std::min(m, K), std::min(m, L)});
  }
  return p;
}

std::vector<DerivativeSet> attach_points(const ArrivalProfile& profile, std::mt19937_64& rng) {
  const auto xs = sample_stratified(profile.received.size(), rng);
  const auto ys = sample_stratified(profile.received.size(), rng);
  std::vector<DerivativeSet> sets(profile.received.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    sets[i].point = {xs[i], ys[i]};
    sets[i].orders = profile.received[i];
  }
  return sets;
}

}  // namespace polycode::cli
