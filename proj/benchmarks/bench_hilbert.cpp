#include <benchmark/benchmark.h>

#include "percloud/hilbert.hpp"
#include "percloud/rng.hpp"

using namespace percloud;

namespace {

PointCloud random_cloud(std::uint32_t n, std::uint64_t seed = 1) {
  Rng rng(seed);
  Matrix coords(n, 3);
  for (std::uint32_t i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) coords(i, j) = rng.uniform(0.0, 10.0);
  return PointCloud(std::move(coords));
}

}  // namespace

static void BM_hilbert_index(benchmark::State& state) {
  const auto r = static_cast<std::uint32_t>(state.range(0));
  std::uint32_t x = 12345 & ((1u << r) - 1), y = x ^ 321, z = x ^ 7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hilbert_index(x, y, z, r));
    ++x;
    x &= (1u << r) - 1;
  }
}
BENCHMARK(BM_hilbert_index)->Arg(8)->Arg(16)->Arg(21);

static void BM_serialize(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const PointCloud cloud = random_cloud(n);
  for (auto _ : state)
    benchmark::DoNotOptimize(serialize(cloud, HilbertConfig{16}, 1));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_serialize)->Arg(1 << 14)->Arg(1 << 17)->Arg(1 << 20)
    ->Unit(benchmark::kMillisecond);

static void BM_serialize_morton_baseline(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const PointCloud cloud = random_cloud(n);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        serialize(cloud, HilbertConfig{16}, 1, CurveKind::kMorton));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_serialize_morton_baseline)->Arg(1 << 17)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
