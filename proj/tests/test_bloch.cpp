#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "gapforge/bloch.hpp"
#include "gapforge/eigensolve.hpp"

using namespace gapforge;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// lowest `count` of |k + G m|^2 over integer m, brute force
std::vector<double> free_levels(const LatticeParams& p, const Eigen::Vector2d& k, int count) {
  Basis G = reciprocal_basis(basis_from_params(p));
  std::vector<double> vals;
  for (int i = -8; i <= 8; ++i)
    for (int j = -8; j <= 8; ++j)
      vals.push_back((k + G * Eigen::Vector2d(i, j)).squaredNorm());
  std::sort(vals.begin(), vals.end());
  vals.resize(count);
  return vals;
}

double max_err_vs_free(const LatticeParams& p, const Eigen::Vector2d& k, int n, int count) {
  SparseHermitian H = assemble_bloch_2d_free(p, k, n);
  EigenPairs ep = smallest_eigenpairs(H, count, 1e-10);
  auto exact = free_levels(p, k, count);
  double err = 0;
  for (int j = 0; j < count; ++j) err = std::max(err, std::abs(ep.values[j] - exact[j]));
  return err;
}

}  // namespace

TEST_CASE("cell metric") {
  Eigen::Matrix2d Ns = metric_from_basis(basis_from_params(LatticeParams::square()));
  CHECK((Ns - Eigen::Matrix2d::Identity()).norm() <= 1e-14);
  Eigen::Matrix2d Nt = metric_from_basis(basis_from_params(LatticeParams::triangular()));
  CHECK(Nt(0, 0) == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(Nt(1, 1) == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(Nt(0, 1) == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(Nt(0, 1) == doctest::Approx(Nt(1, 0)).epsilon(1e-14));
}

TEST_CASE("assembled operators are Hermitian") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  PotentialGrid V;
  V.dim = 2;
  V.n = 12;
  V.V_plus = 50.0;
  V.v.resize(144);
  for (int i = 0; i < 144; ++i) V.v[i] = u(rng);

  for (const char* kind : {"square", "triangular"}) {
    SparseHermitian H = assemble_bloch_2d(LatticeParams::named(kind), {0.7, -0.4}, V);
    Eigen::MatrixXcd D(H);
    CHECK((D - D.adjoint()).norm() <= 1e-10);
    CHECK(D.diagonal().imag().cwiseAbs().maxCoeff() <= 1e-12);
  }

  PotentialGrid V1;
  V1.dim = 1;
  V1.n = 16;
  V1.V_plus = 50.0;
  V1.v.resize(16);
  for (int i = 0; i < 16; ++i) V1.v[i] = u(rng);
  SparseHermitian H1 = assemble_bloch_1d(1.0, 0.9, V1);
  Eigen::MatrixXcd D1(H1);
  CHECK((D1 - D1.adjoint()).norm() <= 1e-10);
}

TEST_CASE("1D discretization converges at second order to free levels") {
  double X = 1.0, k = 0.7;
  auto err_at = [&](int n) {
    PotentialGrid V;
    V.dim = 1;
    V.n = n;
    V.V_plus = 0.0;
    V.v = Eigen::ArrayXd::Zero(n);
    EigenPairs ep = smallest_eigenpairs(assemble_bloch_1d(X, k, V), 5, 1e-10);
    std::vector<double> exact;
    for (int j = -4; j <= 4; ++j) exact.push_back((k + 2.0 * kPi * j) * (k + 2.0 * kPi * j));
    std::sort(exact.begin(), exact.end());
    double e = 0;
    for (int j = 0; j < 5; ++j) e = std::max(e, std::abs(ep.values[j] - exact[j]));
    return e;
  };
  double e32 = err_at(32), e64 = err_at(64), e128 = err_at(128);
  double o1 = std::log2(e32 / e64), o2 = std::log2(e64 / e128);
  CHECK(o1 >= 1.7);
  CHECK(o1 <= 2.3);
  CHECK(o2 >= 1.7);
  CHECK(o2 <= 2.3);
}

TEST_CASE("2D discretization converges at second order to free levels") {
  Eigen::Vector2d k(0.3, 0.2);
  for (const char* kind : {"square", "triangular"}) {
    LatticeParams p = LatticeParams::named(kind);
    double e16 = max_err_vs_free(p, k, 16, 6);
    double e32 = max_err_vs_free(p, k, 32, 6);
    double e64 = max_err_vs_free(p, k, 64, 6);
    double o1 = std::log2(e16 / e32), o2 = std::log2(e32 / e64);
    CHECK(o1 >= 1.7);
    CHECK(o1 <= 2.3);
    CHECK(o2 >= 1.7);
    CHECK(o2 <= 2.3);
  }
}

TEST_CASE("boundary-value Laplacians on the unit square") {
  const int n = 24;
  LatticeParams sq = LatticeParams::square();

  EigenPairs d = smallest_eigenpairs(assemble_laplacian_bc(n, BoundaryCondition::Dirichlet, sq),
                                     3, 1e-10);
  CHECK(std::abs(d.values[0] - 2.0 * kPi * kPi) <= 0.01 * 2.0 * kPi * kPi);
  CHECK(std::abs(d.values[1] - 5.0 * kPi * kPi) <= 0.02 * 5.0 * kPi * kPi);
  CHECK(std::abs(d.values[2] - 5.0 * kPi * kPi) <= 0.02 * 5.0 * kPi * kPi);

  EigenPairs nm = smallest_eigenpairs(assemble_laplacian_bc(n, BoundaryCondition::Neumann, sq),
                                      3, 1e-10);
  CHECK(std::abs(nm.values[0]) <= 1e-7);
  CHECK(std::abs(nm.values[1] - kPi * kPi) <= 0.01 * kPi * kPi);
  CHECK(std::abs(nm.values[2] - kPi * kPi) <= 0.01 * kPi * kPi);
}
