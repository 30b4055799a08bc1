#include <cmath>

#include "doctest.h"
#include "gapforge/bands.hpp"
#include "gapforge/errors.hpp"
#include "gapforge/hill.hpp"

using namespace gapforge;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_CASE("step potential bookkeeping") {
  StepPotential W = StepPotential::single_barrier(1.0, 100.0, 0.4);
  W.validate();
  CHECK(W.intervals() == 2);
  CHECK(W.value_at(0.1) == 0.0);
  CHECK(W.value_at(0.6) == 100.0);
  CHECK(W.value_at(0.99) == 100.0);
  CHECK(W.value_at(1.05) == 0.0);  // periodic wrap
  CHECK(W.interval_length(0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(W.interval_length(1) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(W.ceiling_measure() == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(W.transitions() == 2);

  PotentialGrid g = W.sample(10);
  for (int l = 0; l < 6; ++l) CHECK(g.v[l] == 0.0);
  for (int l = 6; l < 10; ++l) CHECK(g.v[l] == 100.0);

  StepPotential R = StepPotential::replicated_barrier(1.0, 100.0, 2, 0.8);
  R.validate();
  CHECK(R.intervals() == 4);
  CHECK(R.ceiling_measure() == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(R.transitions() == 4);

  // wrap interval: breakpoints away from zero
  StepPotential P;
  P.X = 1.0;
  P.V_plus = 10.0;
  P.breakpoints = {0.25, 0.75};
  P.values = {10.0, 0.0};
  P.validate();
  CHECK(P.interval_of(0.1) == 1);  // wraps into the last interval
  CHECK(P.value_at(0.1) == 0.0);
  CHECK(P.value_at(0.5) == 10.0);
  CHECK(P.interval_length(1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("ceiling-set symmetric difference") {
  StepPotential A = StepPotential::single_barrier(1.0, 100.0, 0.3);
  StepPotential B = StepPotential::single_barrier(1.0, 100.0, 0.5);
  CHECK(ceiling_set_difference(A, B) == doctest::Approx(0.2).epsilon(1e-13));
  CHECK(ceiling_set_difference(A, A) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("dispersion function: free limit and branch continuity") {
  // without a barrier the dispersion function is cos(sqrt(E) X)
  CHECK(std::abs(kp_discriminant(4.0, 0.0, 1.0, 0.0) - std::cos(2.0)) <= 1e-12);
  CHECK(std::abs(kp_discriminant(4.0, 0.3, 1.0, 0.0) - std::cos(2.0)) <= 1e-12);
  // analytic across E = Vp and E = 0
  double below = kp_discriminant(100.0 - 1e-9, 0.4, 1.0, 100.0);
  double above = kp_discriminant(100.0 + 1e-9, 0.4, 1.0, 100.0);
  CHECK(std::abs(below - above) <= 1e-6);
  double l0 = kp_discriminant(-1e-9, 0.4, 1.0, 100.0);
  double r0 = kp_discriminant(1e-9, 0.4, 1.0, 100.0);
  CHECK(std::abs(l0 - r0) <= 1e-6);
}

TEST_CASE("single-barrier formula equals the interval-product trace") {
  for (double b : {0.2, 0.5, 0.8}) {
    StepPotential W = StepPotential::single_barrier(1.0, 100.0, b);
    for (double E : {0.5, 7.3, 55.1, 120.7}) {
      CHECK(std::abs(kp_discriminant(E, b, 1.0, 100.0) - step_discriminant(W, E)) <= 1e-10);
    }
  }
}

TEST_CASE("gap edges of the reference barrier") {
  GapEdges1D e1 = kp_gap_edges(0.4, 1.0, 100.0, 1);
  CHECK(std::abs(e1.alpha - 15.559561367198) <= 1e-7);
  CHECK(std::abs(e1.beta - 55.431680504038) <= 1e-7);
  CHECK(std::abs(e1.ratio() - 1.123296848621) <= 1e-9);

  GapEdges1D e2 = kp_gap_edges(0.4, 1.0, 100.0, 2);
  CHECK(std::abs(e2.alpha - 60.400263368207) <= 1e-7);
  CHECK(std::abs(e2.beta - 103.984858034136) <= 1e-7);

  GapEdges1D e3 = kp_gap_edges(0.4, 1.0, 100.0, 3);
  CHECK(std::abs(e3.alpha - 128.231711912528) <= 1e-7);
  CHECK(std::abs(e3.beta - 143.117872454228) <= 1e-7);
}

TEST_CASE("interval-product edges match the closed form") {
  for (double b : {0.2, 0.4, 0.7}) {
    StepPotential W = StepPotential::single_barrier(1.0, 100.0, b);
    for (int m : {1, 2, 3}) {
      GapEdges1D a = kp_gap_edges(b, 1.0, 100.0, m);
      GapEdges1D s = step_gap_edges(W, m);
      CHECK(std::abs(a.alpha - s.alpha) <= 1e-9);
      CHECK(std::abs(a.beta - s.beta) <= 1e-9);
    }
  }
}

TEST_CASE("optimal barrier width at moderate contrast") {
  OptimalBResult r = optimal_b_search(1.0, 100.0);
  CHECK(std::abs(r.b - 0.4164859919) <= 1e-5);
  CHECK(std::abs(r.G - 1.1236992341) <= 1e-6);
}

TEST_CASE("contrast limits of the first gap") {
  // strong barriers: ratio pinned at 6/5 regardless of width
  for (double b : {0.1, 0.3, 0.5}) {
    double G = kp_gap_edges(b, 1.0, 1e6, 1).ratio();
    CHECK(std::abs(G - 1.2) <= 1e-6);
  }
  CHECK(std::abs(kp_gap_edges(0.3, 1.0, 1e6, 1).ratio() - 1.199999963) <= 5e-7);

  // weak barriers: optimum drifts to the half-width barrier
  GapEdges1D w = kp_gap_edges(0.5, 1.0, 1e-3, 1);
  CHECK(std::abs(w.alpha - 9.869786090) <= 1e-6);
  CHECK(std::abs(w.ratio() - 6.449980109e-05) <= 1e-9);
  OptimalBResult tiny = optimal_b_search(1.0, 1e-3);
  CHECK(std::abs(tiny.b - 0.5) <= 1e-3);

  CHECK(equal_interval_high_contrast() == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(std::abs(interval_union_gap_ratio({0.5, 0.5}, 2) - equal_interval_high_contrast()) <=
        1e-13);
}

TEST_CASE("Bloch levels from the trace: free and barrier cases") {
  StepPotential free0 = StepPotential::single_barrier(1.0, 0.0, 0.0);
  auto lv = transfer_matrix_spectrum(free0, 0.7, 5);
  std::vector<double> exact;
  for (int j = -2; j <= 2; ++j) exact.push_back((0.7 + 2.0 * kPi * j) * (0.7 + 2.0 * kPi * j));
  std::sort(exact.begin(), exact.end());
  for (int j = 0; j < 5; ++j) CHECK(std::abs(lv[j] - exact[j]) <= 1e-8);

  // periodic point: double eigenvalues via the tangency branch
  auto l0 = transfer_matrix_spectrum(free0, 0.0, 5);
  double ref[5] = {0.0, 4 * kPi * kPi, 4 * kPi * kPi, 16 * kPi * kPi, 16 * kPi * kPi};
  for (int j = 0; j < 5; ++j) CHECK(std::abs(l0[j] - ref[j]) <= 1e-6);

  // defining property at a generic wavenumber
  StepPotential W = StepPotential::single_barrier(1.0, 100.0, 0.4);
  auto ls = transfer_matrix_spectrum(W, 1.1, 5);
  for (int j = 0; j < 5; ++j) {
    CHECK(std::abs(step_discriminant(W, ls[j]) - std::cos(1.1)) <= 1e-9);
    if (j) CHECK(ls[j] >= ls[j - 1]);
  }
}

TEST_CASE("edge states: continuity, Bloch sign, normalization, zero counts") {
  StepPotential W = StepPotential::single_barrier(1.0, 100.0, 0.4);

  EdgeFunctions e1 = edge_eigenfunctions(W, 1);
  CHECK(e1.bloch_sign == -1);
  EdgeFunctions e2 = edge_eigenfunctions(W, 2);
  CHECK(e2.bloch_sign == 1);

  for (const StepEigenfunction* f : {&e1.psi_alpha, &e1.psi_beta, &e2.psi_alpha}) {
    // continuity across the internal breakpoint
    CHECK(std::abs(f->value(0.6 - 1e-9) - f->value(0.6 + 1e-9)) <= 1e-6);
    CHECK(std::abs(f->derivative(0.6 - 1e-9) - f->derivative(0.6 + 1e-9)) <= 1e-4);
    // derivative consistency
    double h = 1e-6;
    for (double x : {0.15, 0.7}) {
      double fd = (f->value(x + h) - f->value(x - h)) / (2 * h);
      CHECK(std::abs(fd - f->derivative(x)) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
    // unit norm (Riemann cross-check)
    double s = 0;
    const int n = 8192;
    for (int l = 0; l < n; ++l) {
      double v = f->value(l / double(n));
      s += v * v / n;
    }
    CHECK(std::abs(s - 1.0) <= 1e-4);
  }

  // quasi-periodicity at the seam: psi(X^-) = sign * psi(0)
  CHECK(std::abs(e1.psi_alpha.value(1.0 - 1e-9) + e1.psi_alpha.value(0.0)) <= 1e-5);
  CHECK(std::abs(e2.psi_alpha.value(1.0 - 1e-9) - e2.psi_alpha.value(0.0)) <= 1e-5);

  CHECK(e1.psi_alpha.zeros().size() == 1);
  CHECK(e1.psi_beta.zeros().size() == 1);
  CHECK(e2.psi_alpha.zeros().size() == 2);
  CHECK(e2.psi_beta.zeros().size() == 2);

  // constant potential: every gap is empty
  StepPotential C;
  C.X = 1.0;
  C.V_plus = 100.0;
  C.breakpoints = {0.0};
  C.values = {50.0};
  CHECK_THROWS_AS(edge_eigenfunctions(C, 1), numeric_error);
}

TEST_CASE("fixed-point sweep from the wide barrier reaches the optimum") {
  auto res = optimize_1d(1, 1.0, 100.0, StepPotential::single_barrier(1.0, 100.0, 0.8));
  CHECK(res.stationary);
  // The set-difference tail shrinks by ~0.55 per sweep, so full stationarity
  // at 1e-6 takes ~21 sweeps; the interesting quantities settle much sooner.
  CHECK(res.iterations <= 30);
  CHECK(std::abs(res.G - 1.1236992341) <= 1e-4);
  CHECK(res.V.transitions() == 2);
  double meas = res.V.ceiling_measure();
  CHECK(meas >= 0.405);
  CHECK(meas <= 0.425);
  // ... in particular the barrier measure is within a percent of optimal
  // inside 15 sweeps
  size_t probe = std::min<size_t>(14, res.trace.size() - 1);
  CHECK(res.trace[probe].ceiling_measure >= 0.41);
  CHECK(res.trace[probe].ceiling_measure <= 0.43);
  for (size_t i = 1; i < res.trace.size(); ++i)
    CHECK(res.trace[i].G >= res.trace[i - 1].G - 1e-6);
}

TEST_CASE("replicated starts reach the known optima for higher gaps") {
  const double target[4] = {0.743906, 0.467671, 0.308951, 0.215497};
  for (int m = 2; m <= 5; ++m) {
    auto res = optimize_1d(m, 1.0, 100.0);
    CHECK(res.stationary);
    CHECK(res.iterations <= 30);
    CHECK(std::abs(res.G - target[m - 2]) <= 3e-4);
    CHECK(res.V.transitions() == 2 * m);
  }
}

TEST_CASE("stationarity certificates at the first-gap optimum") {
  auto res = optimize_1d(1, 1.0, 100.0, StepPotential::single_barrier(1.0, 100.0, 0.8));
  Certificates1D c = verify_1d_certificates(res.V, 1, 1e-6);
  CHECK(c.bangbang_fraction == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.transitions == 2);
  CHECK(c.sign_violation <= 1e-6);
  CHECK(c.covanish_beta_alpha <= 1e-4);
  CHECK(std::abs(c.gap_ratio - res.G) <= 1e-9);
  CHECK(c.gap_ratio <= c.upper_bound);
}
