#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "gapforge/potential.hpp"

namespace gapforge {

// Piecewise-constant periodic potential on [0, X). Interval i spans
// [breakpoints[i], breakpoints[i+1]) with wrap-around for the last one.
struct StepPotential {
  double X = 1.0;
  double V_plus = 0.0;
  std::vector<double> breakpoints;  // ascending, in [0, X)
  std::vector<double> values;       // one per interval, in [0, V_plus]

  static StepPotential single_barrier(double X, double Vp, double b);
  // m barriers of width frac*X/m, one per X/m cell; the Table-style start.
  static StepPotential replicated_barrier(double X, double Vp, int m, double frac = 0.8);

  void validate() const;
  int intervals() const { return static_cast<int>(values.size()); }
  int interval_of(double x) const;          // x taken mod X
  double interval_length(int i) const;
  double value_at(double x) const;
  double ceiling_measure() const;           // |{V >= V_plus/2}|
  int transitions() const;                  // value changes around the circle
  PotentialGrid sample(int n) const;        // at x = l*X/n (grid stores unit-torus samples)
};

// Single-barrier dispersion function D(E): D = cos(kX) picks out the Bloch
// spectrum; |D| <= 1 on bands. Analytic in E, including across E = V_plus and
// E = 0 (hyperbolic/trigonometric switch handled by even series).
double kp_discriminant(double E, double b, double X, double Vp);

// tr M(E)/2 for the interval-product transfer matrix; equals kp_discriminant
// for a single barrier.
double step_discriminant(const StepPotential& V, double E);
Eigen::Matrix2d step_transfer_matrix(const StepPotential& V, double E);

struct GapEdges1D {
  double alpha = 0;  // top of band m
  double beta = 0;   // bottom of band m+1
  bool closed = false;
  double ratio() const {
    const double w = beta - alpha, mid = 0.5 * (alpha + beta);
    return w > 0 && mid > 0 ? w / mid : 0.0;
  }
};

// Edges of gap m: the m-th and (m+1)-th roots of D(E) = -1 (odd m, Bloch phase
// -1) or D(E) = +1 (even m, periodic). Closed gaps report equal edges.
GapEdges1D kp_gap_edges(double b, double X, double Vp, int m);
GapEdges1D step_gap_edges(const StepPotential& V, int m);

// First `count` Bloch eigenvalues at wavenumber k, multiplicities included.
std::vector<double> transfer_matrix_spectrum(const StepPotential& V, double k, int count);

// Piecewise-analytic Bloch solution at energy E with psi(x+X) = s psi(x),
// s = +-1. L2-normalized over one period.
class StepEigenfunction {
 public:
  StepEigenfunction(const StepPotential& V, double E, int bloch_sign);
  double value(double x) const;
  double derivative(double x) const;
  Eigen::VectorXd sample(int n) const;  // values at x = l*X/n
  double energy() const { return E_; }
  // zeros of value() (or derivative()) in [0, X), bisected on the analytic form
  std::vector<double> zeros(bool of_derivative = false, int scan = 4096) const;

 private:
  StepPotential V_;
  double E_;
  std::vector<Eigen::Vector2d> states_;  // (psi, psi') at each breakpoint
};

struct EdgeFunctions {
  GapEdges1D edges;
  int bloch_sign = 1;  // -1 for odd m (anti-periodic), +1 for even
  StepEigenfunction psi_alpha, psi_beta;
};

// Eigenfunctions at both edges of gap m. Throws numeric_error("empty gap...")
// when the gap is closed: the rearrangement target is undefined there.
EdgeFunctions edge_eigenfunctions(const StepPotential& V, int m);

// One fixed-point sweep: V' = V_plus on {psi_alpha^2/alpha < psi_beta^2/beta},
// 0 elsewhere (ties go to the zero set); breakpoints bisected on the analytic
// ratio, so the new potential is exact to ~1e-12 X.
StepPotential rearrange_step_1d(const StepPotential& V, const EdgeFunctions& ef);

// |{V1 = ceiling} symmetric-difference {V2 = ceiling}|
double ceiling_set_difference(const StepPotential& V1, const StepPotential& V2);

struct IterationRecord1D {
  double G = 0, alpha = 0, beta = 0;
  double ceiling_measure = 0;
  int transitions = 0;
  double set_change = 0;  // vs previous iterate
};

struct Optimize1DResult {
  StepPotential V;
  double G = 0, alpha = 0, beta = 0;
  int iterations = 0;
  bool stationary = false;
  std::vector<IterationRecord1D> trace;
};

// Fixed-point iteration on the rearrangement map, stopping when the ceiling
// set moves less than set_tol_rel * X (or after max_iters sweeps).
Optimize1DResult optimize_1d(int m, double X, double Vp,
                             const std::optional<StepPotential>& init = std::nullopt,
                             int max_iters = 60, double set_tol_rel = 1e-6);

struct Certificates1D {
  double bangbang_fraction = 0;     // measure fraction within tol*V_plus of {0, V_plus}
  int transitions = 0;
  double sign_violation = 0;        // max wrong-sign magnitude of the ratio rule,
                                    // relative to max |ratio|
  double covanish_beta_alpha = 0;   // zeros of psi_beta' vs zeros of psi_alpha
  double covanish_alpha_beta = 0;   // zeros of psi_alpha' vs zeros of psi_beta
  double period_residual = 0;       // ceiling-set mismatch under an X/m shift
  double gap_ratio = 0;
  double upper_bound = 0;           // 1D admissible-class bound at (m, X, V_plus)
};

Certificates1D verify_1d_certificates(const StepPotential& V, int m, double tol = 1e-9);

struct OptimalBResult {
  double b = 0;
  double G = 0;
};

// Golden-section maximization of the first gap ratio over barrier widths.
OptimalBResult optimal_b_search(double X, double Vp, double xtol = 1e-8);

// Gap ratio of m equal Dirichlet cells in the infinite-contrast limit:
// 2(4-1)/(4+1) = 6/5, independent of m.
double equal_interval_high_contrast();

}  // namespace gapforge
