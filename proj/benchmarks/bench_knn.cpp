#include <benchmark/benchmark.h>

#include "percloud/neighbors.hpp"
#include "percloud/rng.hpp"

using namespace percloud;

namespace {

SuperPoints random_super(std::uint32_t n, std::uint64_t seed) {
  Rng rng(seed);
  SuperPoints sp;
  sp.coords.resize(n, 3);
  for (std::uint32_t i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) sp.coords(i, j) = rng.uniform(0.0, 10.0);
  sp.features.resize(n, 0);
  sp.source.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) sp.source[i] = i;
  return sp;
}

}  // namespace

// Query cost should stay flat as the union grows: the window scan touches
// O(k) entries regardless of N.
static void BM_approx_knn_query(benchmark::State& state) {
  const auto locals = static_cast<std::uint32_t>(state.range(0));
  const std::uint32_t m = 1024, k = 24;
  const SuperPoints global = random_super(m, 1);
  const SuperPoints local = random_super(locals, 2);
  const std::vector<std::uint32_t> gl(m, 0), ll(locals, 0);
  const CombinedIndex index =
      build_combined_index(global, local, gl, ll, HilbertConfig{16}, 4);

  for (auto _ : state)
    benchmark::DoNotOptimize(approx_knn(index, global, local, k, 1));
  state.SetItemsProcessed(state.iterations() * m);
}
BENCHMARK(BM_approx_knn_query)
    ->Arg(10'000)
    ->Arg(100'000)
    ->Arg(1'000'000)
    ->Unit(benchmark::kMillisecond);

static void BM_combined_index_build(benchmark::State& state) {
  const auto locals = static_cast<std::uint32_t>(state.range(0));
  const SuperPoints global = random_super(1024, 1);
  const SuperPoints local = random_super(locals, 2);
  const std::vector<std::uint32_t> gl(1024, 0), ll(locals, 0);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        build_combined_index(global, local, gl, ll, HilbertConfig{16}, 4));
  state.SetItemsProcessed(state.iterations() * (locals + 1024));
}
BENCHMARK(BM_combined_index_build)
    ->Arg(10'000)
    ->Arg(100'000)
    ->Unit(benchmark::kMillisecond);

// Per-query work grows linearly with k.
static void BM_approx_knn_vs_k(benchmark::State& state) {
  const auto k = static_cast<std::uint32_t>(state.range(0));
  const SuperPoints global = random_super(1024, 1);
  const SuperPoints local = random_super(100'000, 2);
  const std::vector<std::uint32_t> gl(1024, 0), ll(100'000, 0);
  const CombinedIndex index =
      build_combined_index(global, local, gl, ll, HilbertConfig{16}, 4);
  for (auto _ : state)
    benchmark::DoNotOptimize(approx_knn(index, global, local, k, 1));
}
BENCHMARK(BM_approx_knn_vs_k)->Arg(6)->Arg(24)->Arg(96)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
