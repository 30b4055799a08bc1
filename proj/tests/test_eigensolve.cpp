#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "gapforge/bloch.hpp"
#include "gapforge/eigensolve.hpp"

using namespace gapforge;

namespace {

SparseHermitian random_banded(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Eigen::Triplet<std::complex<double>>> trip;
  for (int i = 0; i < dim; ++i) {
    trip.emplace_back(i, i, std::complex<double>(3.0 * u(rng), 0.0));
    for (int off = 1; off <= 3; ++off) {
      if (i + off >= dim) continue;
      std::complex<double> z(u(rng), u(rng));
      trip.emplace_back(i, i + off, z);
      trip.emplace_back(i + off, i, std::conj(z));
    }
  }
  SparseHermitian H(dim, dim);
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

}  // namespace

TEST_CASE("iterative backend matches the dense one on a banded matrix") {
  SparseHermitian H = random_banded(700, 42);
  EigenPairs dense = smallest_eigenpairs(H, 8, 1e-10, EigenBackend::Dense);
  EigenPairs iter = smallest_eigenpairs(H, 8, 1e-10, EigenBackend::ShiftInvert);
  CHECK(iter.backend_used == EigenBackend::ShiftInvert);
  for (int j = 0; j < 8; ++j)
    CHECK(std::abs(dense.values[j] - iter.values[j]) <=
          1e-8 * std::max(1.0, std::abs(dense.values[j])));
  CHECK(iter.max_residual <= 1e-10);

  // eigenvectors actually solve the problem
  Eigen::MatrixXcd R = H * iter.vectors - iter.vectors * iter.values.head(8).asDiagonal();
  CHECK(R.colwise().norm().maxCoeff() <= 1e-8);
  // and are orthonormal
  Eigen::MatrixXcd Gram = iter.vectors.adjoint() * iter.vectors;
  CHECK((Gram - Eigen::MatrixXcd::Identity(8, 8)).norm() <= 1e-8);
}

TEST_CASE("degenerate clusters keep their multiplicity") {
  const int dim = 650;
  std::vector<Eigen::Triplet<std::complex<double>>> trip;
  for (int i = 0; i < dim; ++i) {
    double v = (i < 2) ? 0.0 : (i < 5) ? 1.0 : (i < 7) ? 2.0 : 3.0 + 0.01 * i;
    trip.emplace_back(i, i, std::complex<double>(v, 0.0));
  }
  SparseHermitian H(dim, dim);
  H.setFromTriplets(trip.begin(), trip.end());
  EigenPairs ep = smallest_eigenpairs(H, 7, 1e-10, EigenBackend::ShiftInvert);
  const double expect[7] = {0, 0, 1, 1, 1, 2, 2};
  for (int j = 0; j < 7; ++j) CHECK(std::abs(ep.values[j] - expect[j]) <= 1e-9);
}

TEST_CASE("auto backend switches on problem size") {
  SparseHermitian small = random_banded(120, 5);
  CHECK(smallest_eigenpairs(small, 3, 1e-10).backend_used == EigenBackend::Dense);
  SparseHermitian big = random_banded(700, 6);
  CHECK(smallest_eigenpairs(big, 3, 1e-9).backend_used == EigenBackend::ShiftInvert);
}

TEST_CASE("warm start reproduces the same spectrum") {
  SparseHermitian H = random_banded(700, 43);
  EigenPairs first = smallest_eigenpairs(H, 6, 1e-10, EigenBackend::ShiftInvert);
  EigenPairs second =
      smallest_eigenpairs(H, 6, 1e-10, EigenBackend::ShiftInvert, &first.vectors);
  for (int j = 0; j < 6; ++j)
    CHECK(std::abs(first.values[j] - second.values[j]) <= 1e-9);
}
