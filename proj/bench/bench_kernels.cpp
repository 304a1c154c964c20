// Serial vs OpenMP kernel throughput.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "loadpat/kernels.hpp"

namespace {

std::vector<double> random_values(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = unit(rng);
  return v;
}

template <auto Kernel>
void BM_AssignNearest(benchmark::State& state) {
  constexpr std::size_t dim = 24;
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto points = random_values(n * dim, 1);
  const auto centroids = random_values(k * dim, 2);
  std::vector<int> labels(n);
  std::vector<double> dist2(n);
  for (auto _ : state) {
    Kernel(points, centroids, dim, labels, dist2);
    benchmark::DoNotOptimize(dist2.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}

template <auto Kernel>
void BM_SubsetMerits(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto target = random_values(n, 3);
  auto su = random_values(n * n, 4);
  for (std::size_t i = 0; i < n; ++i) su[i * n + i] = 1.0;
  for (auto _ : state) {
    auto merits = Kernel(target, su, n);
    benchmark::DoNotOptimize(merits.data());
  }
  state.SetItemsProcessed(state.iterations() * (int64_t{1} << n));
}

}  // namespace

BENCHMARK(BM_AssignNearest<loadpat::kernels::assign_nearest_serial>)->Args({10000, 7})->Args({50000, 15});
BENCHMARK(BM_AssignNearest<loadpat::kernels::assign_nearest_omp>)->Args({10000, 7})->Args({50000, 15});
BENCHMARK(BM_SubsetMerits<loadpat::kernels::subset_merits_serial>)->Arg(12)->Arg(16);
BENCHMARK(BM_SubsetMerits<loadpat::kernels::subset_merits_omp>)->Arg(12)->Arg(16);

BENCHMARK_MAIN();
