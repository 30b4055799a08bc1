#include "gapforge/bloch.hpp"

#include <vector>

namespace gapforge {

using cd = std::complex<double>;

Eigen::Matrix2d metric_from_basis(const Basis& B) {
  const Eigen::Matrix2d N = (B.transpose() * B).inverse();
  return 0.5 * (N + N.transpose());
}

SparseHermitian assemble_bloch_2d_free(const LatticeParams& p, const Eigen::Vector2d& k, int n) {
  if (n < 4) throw config_error("grid needs n >= 4");
  const Basis B = basis_from_params(p);
  const Eigen::Matrix2d N = metric_from_basis(B);
  const Eigen::Vector2d kp = B.fullPivLu().solve(k);
  const double h = 1.0 / n;
  const double h2 = h * h;

  const cd center(2.0 * (N(0, 0) + N(1, 1)) / h2 + k.squaredNorm(), 0.0);
  const cd right(-N(0, 0) / h2, -kp[0] / h);
  const cd left(-N(0, 0) / h2, kp[0] / h);
  const cd up(-N(1, 1) / h2, -kp[1] / h);
  const cd down(-N(1, 1) / h2, kp[1] / h);
  const double cross = (N(1, 0) + N(0, 1)) / (4.0 * h2);

  std::vector<Eigen::Triplet<cd>> trips;
  trips.reserve(static_cast<std::size_t>(9) * n * n);
  auto idx = [n](int i, int j) { return ((i % n) + n) % n + n * (((j % n) + n) % n); };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int q = idx(i, j);
      trips.emplace_back(q, q, center);
      trips.emplace_back(q, idx(i + 1, j), right);
      trips.emplace_back(q, idx(i - 1, j), left);
      trips.emplace_back(q, idx(i, j + 1), up);
      trips.emplace_back(q, idx(i, j - 1), down);
      trips.emplace_back(q, idx(i + 1, j + 1), cd(-cross, 0.0));
      trips.emplace_back(q, idx(i - 1, j - 1), cd(-cross, 0.0));
      trips.emplace_back(q, idx(i - 1, j + 1), cd(cross, 0.0));
      trips.emplace_back(q, idx(i + 1, j - 1), cd(cross, 0.0));
    }
  SparseHermitian H(n * n, n * n);
  H.setFromTriplets(trips.begin(), trips.end());
  H.makeCompressed();
  return H;
}

SparseHermitian assemble_bloch_2d(const LatticeParams& p, const Eigen::Vector2d& k,
                                  const PotentialGrid& V) {
  V.validate();
  if (V.dim != 2) throw config_error("assemble_bloch_2d needs a 2D potential");
  SparseHermitian H = assemble_bloch_2d_free(p, k, V.n);
  for (int q = 0; q < V.size(); ++q) H.coeffRef(q, q) += cd(V.v[q], 0.0);
  return H;
}

SparseHermitian assemble_bloch_1d(double X, double k, const PotentialGrid& V) {
  V.validate();
  if (V.dim != 1) throw config_error("assemble_bloch_1d needs a 1D potential");
  if (!(X > 0)) throw config_error("period X must be positive");
  const int n = V.n;
  const double h = X / n;
  const double h2 = h * h;
  const cd phase = std::exp(cd(0.0, k * X));

  std::vector<Eigen::Triplet<cd>> trips;
  trips.reserve(static_cast<std::size_t>(3) * n);
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, i, cd(2.0 / h2 + V.v[i], 0.0));
    if (i + 1 < n) {
      trips.emplace_back(i, i + 1, cd(-1.0 / h2, 0.0));
      trips.emplace_back(i + 1, i, cd(-1.0 / h2, 0.0));
    }
  }
  trips.emplace_back(0, n - 1, -std::conj(phase) / h2);
  trips.emplace_back(n - 1, 0, -phase / h2);
  SparseHermitian H(n, n);
  H.setFromTriplets(trips.begin(), trips.end());
  H.makeCompressed();
  return H;
}

SparseHermitian assemble_laplacian_bc(int n, BoundaryCondition bc, const LatticeParams& p) {
  if (n < 3) throw config_error("assemble_laplacian_bc needs n >= 3");
  const Basis B = basis_from_params(p);
  const Eigen::Matrix2d N = metric_from_basis(B);
  const double h = 1.0 / n;

  // Q1 element stiffness for integral of grad(v)^T N grad(u); 2x2 Gauss is
  // exact for these bilinear integrands. Node order (0,0),(1,0),(0,1),(1,1).
  Eigen::Matrix4d Ke = Eigen::Matrix4d::Zero();
  const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  for (double gx : gp)
    for (double gy : gp) {
      Eigen::Matrix<double, 2, 4> Grad;
      Grad << -(1 - gy), (1 - gy), -gy, gy, -(1 - gx), -gx, (1 - gx), gx;
      Grad /= h;
      Ke += 0.25 * h * h * Grad.transpose() * N * Grad;
    }

  const int nn = n + 1;  // nodes per axis
  auto node = [nn](int i, int j) { return i + nn * j; };
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(nn * nn);
  std::vector<int> remap(nn * nn, -1);
  int dim = 0;
  if (bc == BoundaryCondition::Dirichlet) {
    for (int j = 1; j < n; ++j)
      for (int i = 1; i < n; ++i) remap[node(i, j)] = dim++;
  } else {
    for (int q = 0; q < nn * nn; ++q) remap[q] = dim++;
  }

  std::vector<Eigen::Triplet<cd>> trips;
  trips.reserve(static_cast<std::size_t>(16) * n * n);
  for (int ej = 0; ej < n; ++ej)
    for (int ei = 0; ei < n; ++ei) {
      const int nd[4] = {node(ei, ej), node(ei + 1, ej), node(ei, ej + 1), node(ei + 1, ej + 1)};
      for (int r = 0; r < 4; ++r) mass[nd[r]] += 0.25 * h * h;
    }
  for (int ej = 0; ej < n; ++ej)
    for (int ei = 0; ei < n; ++ei) {
      const int nd[4] = {node(ei, ej), node(ei + 1, ej), node(ei, ej + 1), node(ei + 1, ej + 1)};
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
          const int rr = remap[nd[r]], cc = remap[nd[c]];
          if (rr < 0 || cc < 0) continue;
          // lumped-mass similarity keeps the matrix symmetric
          trips.emplace_back(rr, cc, cd(Ke(r, c) / std::sqrt(mass[nd[r]] * mass[nd[c]]), 0.0));
        }
    }
  SparseHermitian A(dim, dim);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  return A;
}

}  // namespace gapforge
