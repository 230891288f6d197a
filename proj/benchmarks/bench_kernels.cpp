#include <benchmark/benchmark.h>

#include "polyrad/kernels.hpp"

namespace {

using namespace polyrad;

void BM_SphericalMeanQuadrature(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(spherical_mean_quadrature(n, KernelKind::Newton3, 1.0, 1.3));
}
BENCHMARK(BM_SphericalMeanQuadrature)->Arg(3)->Arg(5)->Arg(7);

void BM_SphericalMeanNearDiagonal(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(spherical_mean_quadrature(5, KernelKind::Dist, 1.0, 1.0 + 1e-6));
}
BENCHMARK(BM_SphericalMeanNearDiagonal);

void BM_KernelTable(benchmark::State& state) {
  std::vector<double> grid;
  for (int i = 0; i < state.range(0); ++i) grid.push_back(0.1 + 0.37 * i);
  for (auto _ : state) {
    const auto t = KernelTable::build(5, KernelKind::Newton1, grid, grid, 1, true);
    benchmark::DoNotOptimize(t.value(0, 0));
  }
}
BENCHMARK(BM_KernelTable)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace
