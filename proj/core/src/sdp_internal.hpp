#pragma once

// Shared plumbing between the first-order splitting solver and the dense
// barrier solver: the homogenized problem data and the packing of Hermitian
// blocks into real vectors.
//
// hvec maps a d x d Hermitian H to a length-d^2 real vector
//   [diag(H); sqrt(2) Re H(i<j); sqrt(2) Im H(i<j)]
// so that dot(hvec(X), hvec(Y)) = Re <X, Y>_F and the PSD cone maps to a
// proper cone whose projection is a complex eigendecomposition plus clamp.

#include <Eigen/Dense>
#include <vector>

#include "gapforge/sdp.hpp"

namespace gapforge::detail {

inline int hvec_dim(int d) { return d * d; }

inline void hvec_pack(const Eigen::MatrixXcd& H, double* out) {
  const int d = static_cast<int>(H.rows());
  int t = 0;
  for (int i = 0; i < d; ++i) out[t++] = H(i, i).real();
  const double r2 = std::sqrt(2.0);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < j; ++i) {
      out[t++] = r2 * H(i, j).real();
      out[t++] = r2 * H(i, j).imag();
    }
}

inline Eigen::MatrixXcd hvec_unpack(const double* v, int d) {
  Eigen::MatrixXcd H(d, d);
  int t = 0;
  for (int i = 0; i < d; ++i) H(i, i) = v[t++];
  const double ir2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < j; ++i) {
      double re = v[t++] * ir2, im = v[t++] * ir2;
      H(i, j) = std::complex<double>(re, im);
      H(j, i) = std::complex<double>(re, -im);
    }
  return H;
}

// Projection onto the PSD cone in hvec coordinates, in place.
inline void hvec_project_psd(double* v, int d) {
  Eigen::MatrixXcd H = hvec_unpack(v, d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  H = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
  hvec_pack(H, v);
}

// Homogenized data: projected operators W = U^* L U per block, kept next to
// the originating bundle (whose U factors give the rank-one potential terms).
struct HomogenizedProblem {
  const SubspaceBundle* bundle = nullptr;
  double Vp = 0;
  std::vector<Eigen::MatrixXcd> Wa;  // m x m
  std::vector<Eigen::MatrixXcd> Wb;  // mu x mu

  int sites() const { return bundle->sites; }
  int q() const { return bundle->q(); }
  int m() const { return bundle->m; }
  int mu() const { return bundle->mu; }
};

HomogenizedProblem homogenize(const SubspaceBundle& bundle, double Vp);

// Strictly interior homogenized start (theta, alpha~, beta~, V~) built from
// the incumbent; always exists because alpha~ can grow without bound.
struct HomogStart {
  double theta = 0, alpha_t = 0, beta_t = 0;
  Eigen::ArrayXd Vt;
};

HomogStart interior_start(const HomogenizedProblem& hp, const SDPSolution* warm);

// Dense barrier path-following on the homogenized problem (beta~ eliminated
// through alpha~ + beta~ = 2). Intended for small grids; exact enough that
// KKT residuals sit at the duality-gap floor.
std::pair<SDPSolution, DualCertificate> solve_barrier(const HomogenizedProblem& hp,
                                                      const SolveOptions& opts);

std::pair<SDPSolution, DualCertificate> solve_splitting(const HomogenizedProblem& hp,
                                                        const SolveOptions& opts);

// De-homogenize and clamp into the admissible box.
SDPSolution finalize_solution(const HomogenizedProblem& hp, double theta, double alpha_t,
                              double beta_t, const Eigen::ArrayXd& Vt);

}  // namespace gapforge::detail
