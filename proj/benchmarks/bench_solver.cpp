#include <benchmark/benchmark.h>

#include "dimerring/bethe.hpp"
#include "dimerring/observables.hpp"

namespace {

using dimerring::ModelParams;

void BM_SolveSpectrum(benchmark::State& state) {
  const auto p = ModelParams::create(static_cast<int>(state.range(0)), 1.9, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(dimerring::solve_spectrum(p));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveSpectrum)->Arg(42)->Arg(150)->Arg(750)->Arg(1502)->Complexity();

void BM_SolveUnitProduct(benchmark::State& state) {
  const auto p = ModelParams::create(750, 0.2, 5.0);
  for (auto _ : state) benchmark::DoNotOptimize(dimerring::solve_spectrum(p));
}
BENCHMARK(BM_SolveUnitProduct);

void BM_GroundStateReport(benchmark::State& state) {
  const auto p = ModelParams::create(static_cast<int>(state.range(0)), 1.9, 0.3);
  const auto s = dimerring::solve_spectrum(p);
  for (auto _ : state) benchmark::DoNotOptimize(dimerring::ground_state_report(s));
}
BENCHMARK(BM_GroundStateReport)->Arg(150)->Arg(750);

void BM_Wavefunction(benchmark::State& state) {
  const auto p = ModelParams::create(750, 1.9, 0.3);
  const auto s = dimerring::solve_spectrum(p);
  const auto& lv = s.level(100);
  for (auto _ : state) benchmark::DoNotOptimize(dimerring::wavefunction(p, lv));
}
BENCHMARK(BM_Wavefunction);

}  // namespace
