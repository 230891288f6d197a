#include <benchmark/benchmark.h>

#include "polyrad/classifier.hpp"
#include "polyrad/invariants.hpp"

namespace {

using namespace polyrad;

Trajectory quadratic_trajectory() {
  IntegrationConfig cfg;
  cfg.r_max = 1000.0;
  cfg.dense_output_stride = 1.0;
  return integrate(ProblemSpec::biharmonic(3, 7.0), OriginData{0.5081327481546147, 7.0, std::nullopt},
                   cfg);
}

void BM_Classify(benchmark::State& state) {
  const auto t = quadratic_trajectory();
  for (auto _ : state) benchmark::DoNotOptimize(classify(t));
}
BENCHMARK(BM_Classify);

void BM_InvariantSuite(benchmark::State& state) {
  const auto t = quadratic_trajectory();
  const auto g = classify(t);
  for (auto _ : state) benchmark::DoNotOptimize(check_all(t, g));
}
BENCHMARK(BM_InvariantSuite);

}  // namespace
