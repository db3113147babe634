#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "polycode/encoding.hpp"
#include "polycode/executor.hpp"
#include "polycode/interp.hpp"
#include "polycode/simkit.hpp"

using namespace polycode;

namespace {

Block random_block(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Block m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

std::vector<Block> random_blocks(int count, Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::vector<Block> out;
  for (int i = 0; i < count; ++i) out.push_back(random_block(rows, cols, rng));
  return out;
}

// K = L = n, VO profile: every worker stores one A-partition and all of B
std::vector<Response> vertical_rows(int n, std::mt19937_64& rng) {
  const auto xs = sample_stratified(static_cast<std::size_t>(n), rng);
  const auto ys = sample_stratified(static_cast<std::size_t>(n), rng);
  std::vector<Response> rows;
  for (int w = 0; w < n; ++w) {
    for (int l = 0; l < n; ++l) rows.push_back({{xs[w], ys[w]}, {0, l}});
  }
  return rows;
}

}  // namespace

static void BM_EncodeDerivative(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  const auto blocks = random_blocks(K, 64, 64, rng);
  for (auto _ : state) {
    for (int d = 0; d < K; ++d) benchmark::DoNotOptimize(eval_poly_A(blocks, 0.37, d));
  }
}
BENCHMARK(BM_EncodeDerivative)->Arg(4)->Arg(10);

static void BM_BuildInterpolationMatrix(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  const auto rows = vertical_rows(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(build_interpolation_matrix(rows, n, n));
}
BENCHMARK(BM_BuildInterpolationMatrix)->Arg(4)->Arg(6)->Arg(8);

static void BM_DecodeBivariate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  const auto sys = build_interpolation_matrix(vertical_rows(n, rng), n, n);
  const auto payloads = random_blocks(n * n, 16, 16, rng);
  for (auto _ : state) benchmark::DoNotOptimize(decode_bivariate(sys, payloads));
}
BENCHMARK(BM_DecodeBivariate)->Arg(4)->Arg(6);

static void BM_BprocPeel(benchmark::State& state) {
  // K = L = 10 on a 15 x 15 grid, cells arriving in random order
  std::mt19937_64 rng(4);
  std::vector<std::pair<int, int>> cells;
  for (int c = 0; c < 15; ++c) {
    for (int r = 0; r < 15; ++r) cells.emplace_back(c, r);
  }
  std::shuffle(cells.begin(), cells.end(), rng);
  for (auto _ : state) {
    GridState g(15, 15);
    int used = 0;
    for (const auto& [c, r] : cells) {
      ++used;
      if (g.receive(c, r, 10, 10) && g.decodable(10)) break;
    }
    benchmark::DoNotOptimize(used);
  }
}
BENCHMARK(BM_BprocPeel);

static void BM_SimulatedTrial(benchmark::State& state) {
  const auto scheme = static_cast<Scheme>(state.range(0));
  const PartitionPlan plan{10, 1, 10, 10, 10};
  const SchemeConfig cfg = scheme == Scheme::B_PROC
                               ? make_homogeneous(scheme, plan, 15, {3, 5}, 0, 0, 5, 3)
                               : make_homogeneous(scheme, plan, 15, {1, 10});
  const SpeedModel model{0.01, 0.1};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(cfg, model, ++seed));
  state.SetLabel(std::string(to_string(scheme)));
}
BENCHMARK(BM_SimulatedTrial)
    ->Arg(static_cast<int>(Scheme::B_PROC))
    ->Arg(static_cast<int>(Scheme::BPC_VO));

static void BM_RunJob(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const Block A = random_block(60, 24, rng);
  const Block B = random_block(24, 60, rng);
  const auto cfg = make_homogeneous(Scheme::BPC_VO, PartitionPlan{60, 24, 60, 4, 4}, 8, {1, 4});
  JobOptions opt;
  for (auto _ : state) {
    ++opt.seed;
    benchmark::DoNotOptimize(run_job(A, B, cfg, {}, opt));
  }
}
BENCHMARK(BM_RunJob)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
