#include <benchmark/benchmark.h>

#include "dimerring/oracle.hpp"

namespace {

void BM_CharPoly(benchmark::State& state) {
  const auto h = dimerring::build_hamiltonian(dimerring::ModelParams::create(static_cast<int>(state.range(0)), 1.9, 0.3));
  for (auto _ : state) benchmark::DoNotOptimize(dimerring::char_poly(h));
}
BENCHMARK(BM_CharPoly)->Arg(10)->Arg(14)->Arg(30);

void BM_PolyRoots(benchmark::State& state) {
  const auto h = dimerring::build_hamiltonian(dimerring::ModelParams::create(static_cast<int>(state.range(0)), 1.9, 0.3));
  const auto cp = dimerring::char_poly(h);
  for (auto _ : state) benchmark::DoNotOptimize(dimerring::poly_roots(cp));
}
BENCHMARK(BM_PolyRoots)->Arg(10)->Arg(14)->Arg(30);

void BM_CrossValidate(benchmark::State& state) {
  const auto p = dimerring::ModelParams::create(14, 1.9, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(dimerring::cross_validate(p));
}
BENCHMARK(BM_CrossValidate);

}  // namespace
