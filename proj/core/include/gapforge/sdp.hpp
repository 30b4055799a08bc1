#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "gapforge/bloch.hpp"
#include "gapforge/eigensolve.hpp"
#include "gapforge/lattice.hpp"
#include "gapforge/potential.hpp"

namespace gapforge {

// Per-k operators and spectral subspaces of the incumbent potential.
// U_alpha[j] spans the lowest m eigenvectors of L[j] + diag(V), U_beta[j]
// the next mu; both orthonormal.
struct SubspaceBundle {
  int sites = 0;  // grid size (n in 1D, n*n in 2D)
  int dim = 2;    // dimension of the generating grid
  int n = 0;      // points per axis of the generating grid
  int m = 0;
  int mu = 0;
  std::vector<SparseHermitian> L;  // free Bloch operators, one per k
  std::vector<Eigen::MatrixXcd> U_alpha;
  std::vector<Eigen::MatrixXcd> U_beta;
  std::vector<Eigen::VectorXd> levels;  // eigenvalues m+mu lowest, per k

  int q() const { return static_cast<int>(L.size()); }
  void validate() const;
};

// ks: quasi-momenta to sample (2D). threads <= 0 means default_thread_count.
SubspaceBundle build_subspaces(const PotentialGrid& V, const LatticeParams& p,
                               const std::vector<Eigen::Vector2d>& ks, int m, int mu,
                               int threads = 0,
                               const std::vector<Eigen::MatrixXcd>* warm = nullptr);

// 1D variant on [0, X); ks are scalar quasi-momenta.
SubspaceBundle build_subspaces_1d(const PotentialGrid& V, double X,
                                  const std::vector<double>& ks, int m, int mu);

// Solution of the gap SDP in original (de-homogenized) coordinates. The
// solver works on the homogenized problem: maximize beta~ - alpha~ subject to
//   U_a[j]^* (theta L_j + diag(V~) - alpha~ I) U_a[j] <= 0,
//   U_b[j]^* (theta L_j + diag(V~) - beta~  I) U_b[j] >= 0,
//   0 <= V~ <= theta V_plus,  alpha~ + beta~ = 2,  theta >= 0,
// then maps back via alpha = alpha~/theta etc.
struct SDPSolution {
  double alpha = 0;
  double beta = 0;
  double theta = 0;
  double objective = 0;  // 2(beta-alpha)/(alpha+beta)
  PotentialGrid V;
  int iterations = 0;
  double primal_residual = 0;  // relative, solver scale
  double dual_residual = 0;
  double duality_gap = 0;
  bool converged = false;
  const char* method = "";
};

// Multipliers of the fractional problem (already scaled by theta from the
// homogenized ones): A[j] for the alpha block, B[j] for the beta block,
// f_plus / f_minus for the upper / lower box constraints.
struct DualCertificate {
  std::vector<Eigen::MatrixXcd> A;
  std::vector<Eigen::MatrixXcd> B;
  Eigen::ArrayXd f_plus;
  Eigen::ArrayXd f_minus;
};

struct SolveOptions {
  double tol = 1e-7;
  int max_iters = 200000;         // first-order solver iteration cap
  int barrier_site_limit = 300;   // route through the dense path below this
  enum class Method { Auto, FirstOrder, Barrier } method = Method::Auto;
  const SDPSolution* warm = nullptr;
};

std::pair<SDPSolution, DualCertificate> solve_gap_sdp(const SubspaceBundle& bundle,
                                                      double V_plus,
                                                      const SolveOptions& opts = {});

// Residuals of the KKT system of the fractional SDP, evaluated at (sol, cert):
// stationarity r1/r2 (trace identities), r3 (gradient in V), complementary
// slackness, and worst-case feasibility margins on both sides.
struct KKTReport {
  double r1 = 0;  // |sum tr A_j - 4 beta/(alpha+beta)^2|
  double r2 = 0;  // |sum tr B_j - 4 alpha/(alpha+beta)^2|
  double r3 = 0;  // ||diag(sum U_b B U_b^* - U_a A U_a^*) - (f+ - f-)||_inf
  double slack_box_upper = 0;  // |<f+, V+ - V>|
  double slack_box_lower = 0;  // |<f-, V>|
  double slack_alpha = 0;      // max_j |<A_j, alpha-block slack>|
  double slack_beta = 0;
  double primal_alpha = 0;  // max_j max-eig of the alpha block (should be <= 0)
  double primal_beta = 0;   // max_j of -min-eig of the beta block
  double primal_box = 0;    // worst box violation
  double dual_psd = 0;      // max_j of -min-eig of A_j, B_j
  double dual_box = 0;      // -min(f+, f-) clamp
  double worst() const;
};

KKTReport kkt_report(const SDPSolution& sol, const DualCertificate& cert,
                     const SubspaceBundle& bundle, double V_plus);

// True iff some grid value sits at 0 or V_plus within tol*V_plus.
struct BangBangCheck {
  bool weak = false;
  int witness = -1;          // index of the first extreme cell
  double interior_fraction = 1.0;  // fraction of cells strictly inside
};

BangBangCheck weakly_bang_bang_check(const PotentialGrid& V, double tol = 1e-6);

}  // namespace gapforge
