#include <benchmark/benchmark.h>

#include "polyrad/integrator.hpp"

namespace {

using namespace polyrad;

void BM_IntegrateTriharmonic(benchmark::State& state) {
  const auto cf = ClosedForm::triharmonic_5d();
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  cfg.r_max = static_cast<double>(state.range(0));
  cfg.dense_output_stride = 0.0;
  std::size_t steps = 0;
  for (auto _ : state) {
    const auto t = integrate(cf.spec(), cf.origin(), cfg);
    steps = t.steps_accepted;
    benchmark::DoNotOptimize(t.back());
  }
  state.counters["steps"] = static_cast<double>(steps);
}
BENCHMARK(BM_IntegrateTriharmonic)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_IntegratePlanar(benchmark::State& state) {
  const auto spec = ProblemSpec::biharmonic(2, 5.0);
  IntegrationConfig cfg;
  cfg.r_max = 1e4;
  cfg.dense_output_stride = 10.0;
  for (auto _ : state) {
    const auto t = integrate(spec, OriginData{2.0, 2.0, std::nullopt}, cfg);
    benchmark::DoNotOptimize(t.back());
  }
}
BENCHMARK(BM_IntegratePlanar)->Unit(benchmark::kMillisecond);

void BM_Resample(benchmark::State& state) {
  const auto cf = ClosedForm::biharmonic_3d();
  IntegrationConfig cfg;
  cfg.r_max = 100.0;
  const auto t = integrate(cf.spec(), cf.origin(), cfg);
  std::vector<double> radii;
  for (int i = 1; i <= 1000; ++i) radii.push_back(0.1 * i);
  for (auto _ : state) benchmark::DoNotOptimize(resample(t, radii));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(radii.size()));
}
BENCHMARK(BM_Resample);

}  // namespace
