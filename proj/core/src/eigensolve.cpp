#include "gapforge/eigensolve.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <random>

#include "gapforge/errors.hpp"

namespace gapforge {

using cd = std::complex<double>;

namespace {

EigenPairs solve_dense(const SparseHermitian& H, int count) {
  Eigen::MatrixXcd D(H);
  D = 0.5 * (D + D.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D);
  if (es.info() != Eigen::Success) throw numeric_error("dense eigendecomposition failed");
  EigenPairs out;
  out.values = es.eigenvalues().head(count);
  out.vectors = es.eigenvectors().leftCols(count);
  out.backend_used = EigenBackend::Dense;
  out.iterations = 1;
  // dense LAPACK-style residuals are at roundoff; report the a posteriori value
  double res = 0;
  for (int i = 0; i < count; ++i) {
    const double r = (H * out.vectors.col(i) - out.values[i] * out.vectors.col(i)).norm();
    res = std::max(res, r / std::max(1.0, std::abs(out.values[i])));
  }
  out.max_residual = res;
  return out;
}

// Gram-Schmidt against prior columns plus internal QR; returns the rank kept.
int orthonormalize(Eigen::MatrixXcd& W, const Eigen::MatrixXcd& Q, int qcols) {
  for (int pass = 0; pass < 2; ++pass)
    if (qcols > 0) W -= Q.leftCols(qcols) * (Q.leftCols(qcols).adjoint() * W);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(W);
  Eigen::MatrixXcd R = qr.matrixQR().topRows(W.cols()).triangularView<Eigen::Upper>();
  Eigen::MatrixXcd Qf = qr.householderQ() * Eigen::MatrixXcd::Identity(W.rows(), W.cols());
  int kept = 0;
  const double scale = std::max(1e-300, R.cwiseAbs().maxCoeff());
  for (int c = 0; c < W.cols(); ++c)
    if (std::abs(R(c, c)) > 1e-12 * scale) W.col(kept++) = Qf.col(c);
  return kept;
}

EigenPairs solve_shift_invert(const SparseHermitian& H, int count, double tol,
                              const Eigen::MatrixXcd* warm) {
  const int dim = static_cast<int>(H.rows());
  // Gershgorin lower bound keeps the shift strictly below the spectrum.
  double lower = 1e300;
  for (int col = 0; col < H.outerSize(); ++col) {
    double diag = 0, off = 0;
    for (SparseHermitian::InnerIterator it(H, col); it; ++it) {
      if (it.row() == col)
        diag = it.value().real();
      else
        off += std::abs(it.value());
    }
    lower = std::min(lower, diag - off);
  }
  const double sigma = lower - 0.01 * (std::abs(lower) + 1.0) - 1.0;

  SparseHermitian A = H;
  for (int i = 0; i < dim; ++i) A.coeffRef(i, i) -= cd(sigma, 0.0);
  A.makeCompressed();
  Eigen::SparseLU<SparseHermitian> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw numeric_error("sparse factorization failed in shift-invert");

  const int block = std::min(dim, count + 5);
  const int krylov = std::min(dim, std::max(4 * block, 40));

  Eigen::MatrixXcd X(dim, block);
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> nd;
  for (int c = 0; c < block; ++c)
    for (int r = 0; r < dim; ++r) X(r, c) = cd(nd(rng), nd(rng));
  if (warm && warm->rows() == dim && warm->cols() > 0) {
    const int wc = std::min<int>(block, warm->cols());
    X.leftCols(wc) = warm->leftCols(wc);
  }

  EigenPairs out;
  const int max_restarts = 500;
  for (int restart = 0; restart < max_restarts; ++restart) {
    Eigen::MatrixXcd Q(dim, krylov);
    int qc = 0;
    Eigen::MatrixXcd W = X;
    while (qc < krylov) {
      const int kept = orthonormalize(W, Q, qc);
      if (kept == 0) {
        // basis stagnated; top up with fresh random directions
        for (int c = 0; c < W.cols(); ++c)
          for (int r = 0; r < dim; ++r) W(r, c) = cd(nd(rng), nd(rng));
        continue;
      }
      const int take = std::min(kept, krylov - qc);
      Q.middleCols(qc, take) = W.leftCols(take);
      qc += take;
      if (qc >= krylov) break;
      Eigen::MatrixXcd Y(dim, take);
      for (int c = 0; c < take; ++c) Y.col(c) = lu.solve(Q.col(qc - take + c).eval());
      W = Y;
    }
    Eigen::MatrixXcd AQ(dim, qc);
    for (int c = 0; c < qc; ++c) AQ.col(c) = lu.solve(Q.col(c).eval());
    Eigen::MatrixXcd T = Q.leftCols(qc).adjoint() * AQ;
    T = 0.5 * (T + T.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> rr(T);
    // Largest eigenvalues of (H - sigma)^{-1} are the smallest of H.
    Eigen::VectorXd theta = rr.eigenvalues();
    Eigen::MatrixXcd Yr = Q.leftCols(qc) * rr.eigenvectors();

    std::vector<int> order(qc);
    for (int i = 0; i < qc; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int i, int j) { return theta[i] > theta[j]; });

    const int have = std::min(count, qc);
    Eigen::VectorXd vals(have);
    Eigen::MatrixXcd vecs(dim, have);
    double res = 0;
    for (int i = 0; i < have; ++i) {
      const int oi = order[i];
      vecs.col(i) = Yr.col(oi);
      const double lam = sigma + 1.0 / theta[oi];
      vals[i] = lam;
      const double r = (H * vecs.col(i) - lam * vecs.col(i)).norm();
      res = std::max(res, r / std::max(1.0, std::abs(lam)));
    }
    out.iterations = restart + 1;
    if ((res <= tol && have == count) || restart == max_restarts - 1) {
      // ascending order
      std::vector<int> asc(have);
      for (int i = 0; i < have; ++i) asc[i] = i;
      std::sort(asc.begin(), asc.end(), [&](int i, int j) { return vals[i] < vals[j]; });
      out.values.resize(have);
      out.vectors.resize(dim, have);
      for (int i = 0; i < have; ++i) {
        out.values[i] = vals[asc[i]];
        out.vectors.col(i) = vecs.col(asc[i]);
      }
      out.max_residual = res;
      out.backend_used = EigenBackend::ShiftInvert;
      if (res > tol)
        throw numeric_error("shift-invert Lanczos missed tolerance: residual " +
                            std::to_string(res));
      return out;
    }
    // thick restart from the current best Ritz vectors
    for (int i = 0; i < block && i < qc; ++i) X.col(i) = Yr.col(order[i]);
  }
  throw numeric_error("shift-invert Lanczos failed to converge");
}

}  // namespace

EigenPairs smallest_eigenpairs(const SparseHermitian& H, int count, double tol,
                               EigenBackend backend, const Eigen::MatrixXcd* warm_start) {
  const int dim = static_cast<int>(H.rows());
  if (H.rows() != H.cols()) throw config_error("matrix must be square");
  if (count < 1 || count > dim) throw config_error("eigenpair count out of range");
  if (backend == EigenBackend::Auto)
    backend = dim <= 600 ? EigenBackend::Dense : EigenBackend::ShiftInvert;
  if (backend == EigenBackend::Dense) return solve_dense(H, count);
  return solve_shift_invert(H, count, tol, warm_start);
}

}  // namespace gapforge
