#include <benchmark/benchmark.h>

#include "gapforge/bands.hpp"
#include "gapforge/bloch.hpp"
#include "gapforge/eigensolve.hpp"
#include "gapforge/hill.hpp"

using namespace gapforge;

namespace {

PotentialGrid cosine_bumps(int n, double Vp) {
  PotentialGrid V;
  V.dim = 2;
  V.n = n;
  V.V_plus = Vp;
  V.v.resize(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double cx = std::cos(2 * M_PI * i / n), cy = std::cos(2 * M_PI * j / n);
      V.v[i + n * j] = Vp * 0.25 * (2.0 + cx + cy);
    }
  return V;
}

}  // namespace

static void BM_Assemble2D(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  PotentialGrid V = cosine_bumps(n, 50.0);
  LatticeParams p = LatticeParams::triangular();
  for (auto _ : state)
    benchmark::DoNotOptimize(assemble_bloch_2d(p, {0.4, 0.9}, V));
}
BENCHMARK(BM_Assemble2D)->Arg(16)->Arg(32)->Arg(64);

static void BM_Eigs2D(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  PotentialGrid V = cosine_bumps(n, 50.0);
  SparseHermitian H = assemble_bloch_2d(LatticeParams::triangular(), {0.4, 0.9}, V);
  for (auto _ : state)
    benchmark::DoNotOptimize(smallest_eigenpairs(H, 4, 1e-9));
}
BENCHMARK(BM_Eigs2D)->Arg(16)->Arg(24)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_WarmEigs2D(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  PotentialGrid V = cosine_bumps(n, 50.0);
  SparseHermitian H = assemble_bloch_2d(LatticeParams::triangular(), {0.4, 0.9}, V);
  EigenPairs seed = smallest_eigenpairs(H, 4, 1e-9, EigenBackend::ShiftInvert);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        smallest_eigenpairs(H, 4, 1e-9, EigenBackend::ShiftInvert, &seed.vectors));
}
BENCHMARK(BM_WarmEigs2D)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_BandPath1D(benchmark::State& state) {
  StepPotential W = StepPotential::single_barrier(1.0, 100.0, 0.4);
  PotentialGrid V = W.sample(128);
  std::vector<double> ks;
  for (int i = 0; i <= 16; ++i) ks.push_back(M_PI * i / 16.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(dispersion_1d(V, 1.0, ks, 4));
}
BENCHMARK(BM_BandPath1D)->Unit(benchmark::kMillisecond);
