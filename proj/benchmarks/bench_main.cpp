#include <benchmark/benchmark.h>

#include <map>

#include "capfactor/descriptives.hpp"
#include "capfactor/experiments.hpp"
#include "capfactor/factor_models.hpp"
#include "capfactor/pca.hpp"
#include "capfactor/scaling_laws.hpp"
#include "capfactor/synthetic.hpp"

using namespace capfactor;

namespace {

const Population& population(int m) {
  static std::map<int, Population> cache;
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, generate_population(make_default_config(19, m, 3, 1))).first;
  return it->second;
}

void BM_FitItemCurve(benchmark::State& state) {
  const Dataset& ds = population(static_cast<int>(state.range(0))).dataset;
  const Vector row = ds.scores.row(0).transpose();
  const Vector log_n = ds.log_params();
  for (auto _ : state) benchmark::DoNotOptimize(fit_item_curve(row, log_n, ds.subtasks[0].chance_rate));
}
BENCHMARK(BM_FitItemCurve)->Arg(1000)->Arg(4395);

void BM_FitEfa(benchmark::State& state) {
  const Dataset& ds = population(4395).dataset;
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_efa(ds.scores, k));
}
BENCHMARK(BM_FitEfa)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_FitStructured(benchmark::State& state) {
  const Dataset& ds = population(4395).dataset;
  const Vector log_n = ds.log_params();
  for (auto _ : state) benchmark::DoNotOptimize(fit_structured(ds.scores, log_n, 5));
}
BENCHMARK(BM_FitStructured)->Unit(benchmark::kMillisecond);

void BM_ParallelAnalysis(benchmark::State& state) {
  const Dataset& ds = population(static_cast<int>(state.range(0))).dataset;
  for (auto _ : state) benchmark::DoNotOptimize(parallel_analysis(ds.scores, 100));
}
BENCHMARK(BM_ParallelAnalysis)->Arg(1000)->Arg(4395)->Unit(benchmark::kMillisecond);

void BM_Pca(benchmark::State& state) {
  const Dataset& ds = population(4395).dataset;
  for (auto _ : state) benchmark::DoNotOptimize(fit_pca(ds.scores, 5));
}
BENCHMARK(BM_Pca)->Unit(benchmark::kMicrosecond);

void BM_ExperimentB(benchmark::State& state) {
  const Dataset& ds = population(4395).dataset;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment_b(ds, 5));
}
BENCHMARK(BM_ExperimentB)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace
BENCHMARK_MAIN();
