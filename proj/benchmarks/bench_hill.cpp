#include <benchmark/benchmark.h>

#include "gapforge/hill.hpp"

using namespace gapforge;

static void BM_KpDiscriminant(benchmark::State& state) {
  double E = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kp_discriminant(E, 0.4, 1.0, 100.0));
    E += 0.37;
    if (E > 400.0) E = 0.0;
  }
}
BENCHMARK(BM_KpDiscriminant);

static void BM_StepDiscriminant(benchmark::State& state) {
  StepPotential W = StepPotential::replicated_barrier(1.0, 100.0, static_cast<int>(state.range(0)), 0.8);
  double E = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(step_discriminant(W, E));
    E += 0.37;
    if (E > 400.0) E = 0.0;
  }
}
BENCHMARK(BM_StepDiscriminant)->Arg(1)->Arg(3)->Arg(5);

static void BM_GapEdges(benchmark::State& state) {
  int m = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kp_gap_edges(0.4, 1.0, 100.0, m));
}
BENCHMARK(BM_GapEdges)->Arg(1)->Arg(3)->Arg(5);

static void BM_RearrangeSweep(benchmark::State& state) {
  StepPotential V = StepPotential::single_barrier(1.0, 100.0, 0.8);
  for (auto _ : state) {
    EdgeFunctions ef = edge_eigenfunctions(V, 1);
    benchmark::DoNotOptimize(rearrange_step_1d(V, ef));
  }
}
BENCHMARK(BM_RearrangeSweep);

static void BM_Optimize1D(benchmark::State& state) {
  int m = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(optimize_1d(m, 1.0, 100.0));
}
BENCHMARK(BM_Optimize1D)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
