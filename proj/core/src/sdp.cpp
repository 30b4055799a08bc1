#include "gapforge/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "gapforge/errors.hpp"
#include "gapforge/util.hpp"
#include "sdp_internal.hpp"

namespace gapforge {

void SubspaceBundle::validate() const {
  if (m < 1 || mu < 1) throw config_error("subspace dimensions must be >= 1");
  if (L.empty()) throw config_error("subspace bundle has no k points");
  if (U_alpha.size() != L.size() || U_beta.size() != L.size())
    throw config_error("subspace bundle blocks out of step");
  for (size_t j = 0; j < L.size(); ++j) {
    if (U_alpha[j].rows() != sites || U_alpha[j].cols() != m ||
        U_beta[j].rows() != sites || U_beta[j].cols() != mu)
      throw config_error("subspace block dimensions do not match the grid");
    double ea = (U_alpha[j].adjoint() * U_alpha[j] -
                 Eigen::MatrixXcd::Identity(m, m))
                    .cwiseAbs()
                    .maxCoeff();
    double eb = (U_beta[j].adjoint() * U_beta[j] -
                 Eigen::MatrixXcd::Identity(mu, mu))
                    .cwiseAbs()
                    .maxCoeff();
    if (ea > 1e-10 || eb > 1e-10)
      throw numeric_error("subspace basis lost orthonormality");
  }
}

SubspaceBundle build_subspaces(const PotentialGrid& V, const LatticeParams& p,
                               const std::vector<Eigen::Vector2d>& ks, int m, int mu,
                               int threads, const std::vector<Eigen::MatrixXcd>* warm) {
  V.validate();
  if (V.dim != 2) throw config_error("2D subspace build needs a 2D potential");
  if (ks.empty()) throw config_error("need at least one k point");
  (void)threads;  // eigensolves are sequential; each one is internally blocked
  SubspaceBundle b;
  b.sites = V.size();
  b.dim = 2;
  b.n = V.n;
  b.m = m;
  b.mu = mu;
  b.L.resize(ks.size());
  b.U_alpha.resize(ks.size());
  b.U_beta.resize(ks.size());
  b.levels.resize(ks.size());
  for (size_t j = 0; j < ks.size(); ++j) {
    b.L[j] = assemble_bloch_2d_free(p, ks[j], V.n);
    SparseHermitian H = b.L[j];
    for (int l = 0; l < b.sites; ++l) H.coeffRef(l, l) += V.v[l];
    const Eigen::MatrixXcd* w0 = (warm && j < warm->size()) ? &(*warm)[j] : nullptr;
    EigenPairs ep = smallest_eigenpairs(H, m + mu, 1e-9, EigenBackend::Auto, w0);
    b.U_alpha[j] = ep.vectors.leftCols(m);
    b.U_beta[j] = ep.vectors.middleCols(m, mu);
    b.levels[j] = ep.values;
  }
  return b;
}

SubspaceBundle build_subspaces_1d(const PotentialGrid& V, double X,
                                  const std::vector<double>& ks, int m, int mu) {
  V.validate();
  if (V.dim != 1) throw config_error("1D subspace build needs a 1D potential");
  if (ks.empty()) throw config_error("need at least one k point");
  PotentialGrid zero = V;
  zero.v.setZero();
  SubspaceBundle b;
  b.sites = V.n;
  b.dim = 1;
  b.n = V.n;
  b.m = m;
  b.mu = mu;
  b.L.resize(ks.size());
  b.U_alpha.resize(ks.size());
  b.U_beta.resize(ks.size());
  b.levels.resize(ks.size());
  for (size_t j = 0; j < ks.size(); ++j) {
    b.L[j] = assemble_bloch_1d(X, ks[j], zero);
    SparseHermitian H = b.L[j];
    for (int l = 0; l < b.sites; ++l) H.coeffRef(l, l) += V.v[l];
    EigenPairs ep = smallest_eigenpairs(H, m + mu, 1e-9);
    b.U_alpha[j] = ep.vectors.leftCols(m);
    b.U_beta[j] = ep.vectors.middleCols(m, mu);
    b.levels[j] = ep.values;
  }
  return b;
}

namespace detail {

HomogenizedProblem homogenize(const SubspaceBundle& bundle, double Vp) {
  if (!(Vp > 0)) throw config_error("V_plus must be positive for the gap program");
  HomogenizedProblem hp;
  hp.bundle = &bundle;
  hp.Vp = Vp;
  hp.Wa.resize(bundle.q());
  hp.Wb.resize(bundle.q());
  for (int j = 0; j < bundle.q(); ++j) {
    hp.Wa[j] = bundle.U_alpha[j].adjoint() * (bundle.L[j] * bundle.U_alpha[j]);
    hp.Wa[j] = 0.5 * (hp.Wa[j] + hp.Wa[j].adjoint().eval());
    hp.Wb[j] = bundle.U_beta[j].adjoint() * (bundle.L[j] * bundle.U_beta[j]);
    hp.Wb[j] = 0.5 * (hp.Wb[j] + hp.Wb[j].adjoint().eval());
  }
  return hp;
}

HomogStart interior_start(const HomogenizedProblem& hp, const SDPSolution* warm) {
  const SubspaceBundle& b = *hp.bundle;
  const int N = hp.sites();
  HomogStart st;
  Eigen::ArrayXd V(N);
  double alpha0, beta0;
  if (warm && warm->V.v.size() == N && warm->theta > 0) {
    V = warm->V.v;
    alpha0 = warm->alpha;
    beta0 = warm->beta;
  } else {
    V.setZero();
    alpha0 = 0;
    beta0 = 0;
    for (int j = 0; j < b.q(); ++j) {
      alpha0 = std::max(alpha0, b.levels[j][b.m - 1]);
      beta0 = (j == 0) ? b.levels[j][b.m] : std::min(beta0, b.levels[j][b.m]);
    }
    // the bundle's own generating potential is the natural incumbent; fall
    // back to it through the levels only (V is owned by the caller)
  }
  double denom = alpha0 + beta0;
  st.theta = denom > 0 ? 2.0 / denom : 1.0;
  // strictly inside the box
  double margin = 1e-3 * hp.Vp;
  st.Vt = st.theta * V.min(hp.Vp - margin).max(margin);
  // strictly inside both spectral cones: alpha~ above every projected
  // max-level, beta~ = 2 - alpha~ below every projected min-level if
  // possible; feasibility never fails because beta~ is unbounded below
  double amax = -1e300, bmin = 1e300;
  for (int j = 0; j < hp.q(); ++j) {
    Eigen::MatrixXcd Ma =
        st.theta * hp.Wa[j] +
        b.U_alpha[j].adjoint() * (st.Vt.matrix().asDiagonal() * b.U_alpha[j]);
    Eigen::MatrixXcd Mb =
        st.theta * hp.Wb[j] +
        b.U_beta[j].adjoint() * (st.Vt.matrix().asDiagonal() * b.U_beta[j]);
    amax = std::max(amax, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(Ma)
                              .eigenvalues()
                              .maxCoeff());
    bmin = std::min(bmin, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(Mb)
                              .eigenvalues()
                              .minCoeff());
  }
  if (amax < bmin) {
    st.alpha_t = amax + 0.25 * (bmin - amax);
    st.alpha_t = std::max(st.alpha_t, 2.0 - bmin + 0.25 * (bmin - amax));
  } else {
    st.alpha_t = std::max(amax, 2.0 - bmin) + 0.1 * std::max(1.0, std::abs(amax));
  }
  st.beta_t = 2.0 - st.alpha_t;
  return st;
}

SDPSolution finalize_solution(const HomogenizedProblem& hp, double theta, double alpha_t,
                              double beta_t, const Eigen::ArrayXd& Vt) {
  if (!(theta > 0)) throw numeric_error("homogenization scalar collapsed to zero");
  SDPSolution sol;
  sol.theta = theta;
  sol.alpha = alpha_t / theta;
  sol.beta = beta_t / theta;
  sol.V.V_plus = hp.Vp;
  sol.V.dim = hp.bundle->dim;
  sol.V.n = hp.bundle->n;
  sol.V.v = (Vt / theta).min(hp.Vp).max(0.0);
  double mid = 0.5 * (sol.alpha + sol.beta);
  sol.objective = (sol.beta > sol.alpha && mid > 0) ? (sol.beta - sol.alpha) / mid : 0.0;
  return sol;
}

namespace {

// Row layout of the splitting solver's constraint matrix.
struct ConeLayout {
  int q, m, mu, N;
  int da() const { return hvec_dim(m); }
  int db() const { return hvec_dim(mu); }
  int zero_row() const { return 0; }
  int alpha_row(int j) const { return 1 + j * da(); }
  int beta_row(int j) const { return 1 + q * da() + j * db(); }
  int lower_row() const { return 1 + q * (da() + db()); }
  int upper_row() const { return lower_row() + N; }
  int theta_row() const { return upper_row() + N; }
  int rows() const { return theta_row() + 1; }
  int cols() const { return N + 3; }  // (theta, alpha~, beta~, V~)
};

void project_cone(Eigen::VectorXd& s, const ConeLayout& L) {
  s[L.zero_row()] = 0.0;
  for (int j = 0; j < L.q; ++j) {
    hvec_project_psd(s.data() + L.alpha_row(j), L.m);
    hvec_project_psd(s.data() + L.beta_row(j), L.mu);
  }
  int t = L.lower_row();
  for (int i = t; i < L.rows(); ++i) s[i] = std::max(0.0, s[i]);
}

}  // namespace

std::pair<SDPSolution, DualCertificate> solve_splitting(const HomogenizedProblem& hp,
                                                        const SolveOptions& opts) {
  const SubspaceBundle& bnd = *hp.bundle;
  ConeLayout lay{hp.q(), hp.m(), hp.mu(), hp.sites()};
  const int M = lay.rows(), C = lay.cols();

  // Dense constraint matrix: columns 0..2 are (theta, alpha~, beta~), then V~.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(M, C);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(M);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(C);
  c[1] = 1.0;
  c[2] = -1.0;
  A(0, 1) = 1.0;
  A(0, 2) = 1.0;
  b[0] = 2.0;
  std::vector<double> buf;
  for (int j = 0; j < lay.q; ++j) {
    const int ra = lay.alpha_row(j), rb = lay.beta_row(j);
    buf.assign(std::max(lay.da(), lay.db()), 0.0);
    hvec_pack(hp.Wa[j], buf.data());
    for (int t = 0; t < lay.da(); ++t) A(ra + t, 0) = buf[t];
    for (int i = 0; i < lay.m; ++i) A(ra + i, 1) = -1.0;  // hvec(-I): diagonal head
    hvec_pack(hp.Wb[j], buf.data());
    for (int t = 0; t < lay.db(); ++t) A(rb + t, 0) = -buf[t];
    for (int i = 0; i < lay.mu; ++i) A(rb + i, 2) = 1.0;
    for (int l = 0; l < lay.N; ++l) {
      Eigen::VectorXcd wa = bnd.U_alpha[j].row(l).adjoint();
      Eigen::VectorXcd wb = bnd.U_beta[j].row(l).adjoint();
      hvec_pack(wa * wa.adjoint(), buf.data());
      for (int t = 0; t < lay.da(); ++t) A(ra + t, 3 + l) = buf[t];
      hvec_pack(wb * wb.adjoint(), buf.data());
      for (int t = 0; t < lay.db(); ++t) A(rb + t, 3 + l) = -buf[t];
    }
  }
  for (int l = 0; l < lay.N; ++l) {
    A(lay.lower_row() + l, 3 + l) = -1.0;
    A(lay.upper_row() + l, 0) = -hp.Vp;
    A(lay.upper_row() + l, 3 + l) = 1.0;
  }
  A(lay.theta_row(), 0) = -1.0;

  // Ruiz equilibration; PSD block rows share one scale to keep the cone shape.
  Eigen::VectorXd Dr = Eigen::VectorXd::Ones(M), Dc = Eigen::VectorXd::Ones(C);
  for (int pass = 0; pass < 10; ++pass) {
    Eigen::VectorXd r(M), cc(C);
    for (int i = 0; i < M; ++i) r[i] = A.row(i).cwiseAbs().maxCoeff();
    for (int j = 0; j < lay.q; ++j) {
      double ma = r.segment(lay.alpha_row(j), lay.da()).maxCoeff();
      r.segment(lay.alpha_row(j), lay.da()).setConstant(ma);
      double mb = r.segment(lay.beta_row(j), lay.db()).maxCoeff();
      r.segment(lay.beta_row(j), lay.db()).setConstant(mb);
    }
    for (int i = 0; i < M; ++i) r[i] = r[i] > 0 ? 1.0 / std::sqrt(r[i]) : 1.0;
    A = r.asDiagonal() * A;
    Dr = Dr.cwiseProduct(r);
    for (int i = 0; i < C; ++i) cc[i] = A.col(i).cwiseAbs().maxCoeff();
    for (int i = 0; i < C; ++i) cc[i] = cc[i] > 0 ? 1.0 / std::sqrt(cc[i]) : 1.0;
    A = A * cc.asDiagonal();
    Dc = Dc.cwiseProduct(cc);
  }
  Eigen::VectorXd bs = Dr.asDiagonal() * b;
  Eigen::VectorXd cs = Dc.asDiagonal() * c;
  if (std::getenv("GAPFORGE_SDP_DEBUG"))
    std::fprintf(stderr, "splitting: M=%d C=%d scaled\n", M, C);

  Eigen::LLT<Eigen::MatrixXd> llt(A.transpose() * A +
                                  1e-12 * Eigen::MatrixXd::Identity(C, C));
  if (llt.info() != Eigen::Success)
    throw numeric_error("splitting solver: normal equations not positive definite");
  if (std::getenv("GAPFORGE_SDP_DEBUG")) std::fprintf(stderr, "splitting: factored\n");

  // Scaled-variable start from the interior point.
  HomogStart st = interior_start(hp, opts.warm);
  Eigen::VectorXd x(C);
  x[0] = st.theta;
  x[1] = st.alpha_t;
  x[2] = st.beta_t;
  x.tail(lay.N) = st.Vt.matrix();
  x = Dc.cwiseInverse().asDiagonal() * x;
  Eigen::VectorXd s = bs - A * x;
  project_cone(s, lay);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(M);

  double rho = 1.0;
  const double relax = 1.6;
  double rp = 1, rd = 1, gap = 1;
  int it = 0, last_rho_change = -1, rho_changes = 0;
  Eigen::VectorXd s_prev = s, Ax(M), h(M);
  for (; it < opts.max_iters; ++it) {
    Eigen::VectorXd rhs = A.transpose() * (bs - s - u) - cs / rho;
    x = llt.solve(rhs);
    Ax.noalias() = A * x;
    h = relax * Ax + (1.0 - relax) * (bs - s);
    s_prev.swap(s);
    s = bs - h - u;
    project_cone(s, lay);
    u += h + s - bs;

    if (it % 25 == 24) {
      double bscale = 1.0 + bs.cwiseAbs().maxCoeff();
      rp = (Ax + s - bs).cwiseAbs().maxCoeff() / bscale;
      rd = rho * (A.transpose() * (s - s_prev)).cwiseAbs().maxCoeff() /
           (1.0 + cs.cwiseAbs().maxCoeff());
      double pobj = cs.dot(x), dobj = -bs.dot(rho * u);
      gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      if (std::getenv("GAPFORGE_SDP_DEBUG") && it % 2000 == 24)
        std::fprintf(stderr, "it=%d rp=%.3e rd=%.3e gap=%.3e pobj=%.6f rho=%.3e\n",
                     it, rp, rd, gap, pobj, rho);
      if (rp < opts.tol && rd < opts.tol && gap < opts.tol) {
        ++it;
        break;
      }
      // Residual balancing with a cooldown: reacting to every transient makes
      // rho flap in a limit cycle and the iteration never settles. u = y/rho,
      // so u is rescaled whenever rho changes.
      if (rho_changes < 8 && it - last_rho_change > 1000) {
        if (rp > 25 * rd) {
          rho *= 2;
          u *= 0.5;
          last_rho_change = it;
          ++rho_changes;
        } else if (rd > 25 * rp) {
          rho *= 0.5;
          u *= 2.0;
          last_rho_change = it;
          ++rho_changes;
        }
      }
    }
  }

  Eigen::VectorXd xo = Dc.asDiagonal() * x;             // original variables
  Eigen::VectorXd y = Dr.asDiagonal() * (rho * u);      // original duals
  SDPSolution sol = finalize_solution(hp, xo[0], xo[1], xo[2], xo.tail(lay.N).array());
  sol.iterations = it;
  sol.primal_residual = rp;
  sol.dual_residual = rd;
  sol.duality_gap = gap;
  sol.converged = rp < opts.tol && rd < opts.tol && gap < opts.tol;
  sol.method = "splitting";

  DualCertificate cert;
  cert.A.resize(lay.q);
  cert.B.resize(lay.q);
  double th = sol.theta;
  for (int j = 0; j < lay.q; ++j) {
    cert.A[j] = th * hvec_unpack(y.data() + lay.alpha_row(j), lay.m);
    cert.B[j] = th * hvec_unpack(y.data() + lay.beta_row(j), lay.mu);
  }
  cert.f_minus = th * y.segment(lay.lower_row(), lay.N).array();
  cert.f_plus = th * y.segment(lay.upper_row(), lay.N).array();
  return {sol, cert};
}

}  // namespace detail

std::pair<SDPSolution, DualCertificate> solve_gap_sdp(const SubspaceBundle& bundle,
                                                      double V_plus,
                                                      const SolveOptions& opts) {
  bundle.validate();
  detail::HomogenizedProblem hp = detail::homogenize(bundle, V_plus);
  bool barrier = opts.method == SolveOptions::Method::Barrier ||
                 (opts.method == SolveOptions::Method::Auto &&
                  bundle.sites <= opts.barrier_site_limit);
  return barrier ? detail::solve_barrier(hp, opts) : detail::solve_splitting(hp, opts);
}

KKTReport kkt_report(const SDPSolution& sol, const DualCertificate& cert,
                     const SubspaceBundle& bundle, double V_plus) {
  const int q = bundle.q(), N = bundle.sites;
  if (static_cast<int>(cert.A.size()) != q || static_cast<int>(cert.B.size()) != q ||
      cert.f_plus.size() != N || cert.f_minus.size() != N || sol.V.v.size() != N)
    throw config_error("KKT report: mismatched dimensions");
  KKTReport r;
  double a = sol.alpha, b = sol.beta, mid2 = (a + b) * (a + b);
  double trA = 0, trB = 0;
  Eigen::ArrayXd grad = Eigen::ArrayXd::Zero(N);
  for (int j = 0; j < q; ++j) {
    trA += cert.A[j].real().trace();
    trB += cert.B[j].real().trace();
    // diagonal of U B U^* - U A U^* accumulated row-wise
    grad += ((bundle.U_beta[j] * cert.B[j]).cwiseProduct(bundle.U_beta[j].conjugate()))
                .rowwise()
                .sum()
                .real()
                .array();
    grad -= ((bundle.U_alpha[j] * cert.A[j]).cwiseProduct(bundle.U_alpha[j].conjugate()))
                .rowwise()
                .sum()
                .real()
                .array();

    Eigen::MatrixXcd Sa =
        bundle.U_alpha[j].adjoint() * (bundle.L[j] * bundle.U_alpha[j]) +
        bundle.U_alpha[j].adjoint() * (sol.V.v.matrix().asDiagonal() * bundle.U_alpha[j]) -
        a * Eigen::MatrixXcd::Identity(bundle.m, bundle.m);
    Eigen::MatrixXcd Sb =
        bundle.U_beta[j].adjoint() * (bundle.L[j] * bundle.U_beta[j]) +
        bundle.U_beta[j].adjoint() * (sol.V.v.matrix().asDiagonal() * bundle.U_beta[j]) -
        b * Eigen::MatrixXcd::Identity(bundle.mu, bundle.mu);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ea(0.5 * (Sa + Sa.adjoint().eval()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eb(0.5 * (Sb + Sb.adjoint().eval()));
    r.primal_alpha = std::max(r.primal_alpha, ea.eigenvalues().maxCoeff());
    r.primal_beta = std::max(r.primal_beta, -eb.eigenvalues().minCoeff());
    r.slack_alpha = std::max(
        r.slack_alpha, std::abs((cert.A[j].adjoint() * Sa).trace().real()));
    r.slack_beta = std::max(
        r.slack_beta, std::abs((cert.B[j].adjoint() * Sb).trace().real()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> da(cert.A[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> db(cert.B[j]);
    r.dual_psd = std::max(r.dual_psd, -da.eigenvalues().minCoeff());
    r.dual_psd = std::max(r.dual_psd, -db.eigenvalues().minCoeff());
  }
  r.r1 = std::abs(trA - 4.0 * b / mid2);
  r.r2 = std::abs(trB - 4.0 * a / mid2);
  r.r3 = (grad - (cert.f_plus - cert.f_minus)).abs().maxCoeff();
  r.slack_box_upper = std::abs((cert.f_plus * (V_plus - sol.V.v)).sum());
  r.slack_box_lower = std::abs((cert.f_minus * sol.V.v).sum());
  r.primal_box = std::max(0.0, (sol.V.v - V_plus).maxCoeff());
  r.primal_box = std::max(r.primal_box, std::max(0.0, (-sol.V.v).maxCoeff()));
  r.dual_box = std::max(0.0, -std::min(cert.f_plus.minCoeff(), cert.f_minus.minCoeff()));
  return r;
}

double KKTReport::worst() const {
  double w = 0;
  for (double v : {r1, r2, r3, slack_box_upper, slack_box_lower, slack_alpha,
                   slack_beta, primal_alpha, primal_beta, primal_box, dual_psd, dual_box})
    w = std::max(w, v);
  return w;
}

BangBangCheck weakly_bang_bang_check(const PotentialGrid& V, double tol) {
  V.validate();
  BangBangCheck c;
  int interior = 0;
  double edge = tol * std::max(V.V_plus, 1.0);
  for (int l = 0; l < V.size(); ++l) {
    bool extreme = V.v[l] <= edge || V.v[l] >= V.V_plus - edge;
    if (extreme && c.witness < 0) {
      c.weak = true;
      c.witness = l;
    }
    if (!extreme) ++interior;
  }
  c.interior_fraction = static_cast<double>(interior) / V.size();
  return c;
}

}  // namespace gapforge
