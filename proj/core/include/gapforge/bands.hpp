#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gapforge/eigensolve.hpp"
#include "gapforge/lattice.hpp"
#include "gapforge/potential.hpp"

namespace gapforge {

struct DispersionTable {
  int dim = 2;
  LatticeParams params;                // meaningful for dim == 2
  double X = 1.0;                      // period for dim == 1
  std::vector<Eigen::Vector2d> k;      // 1D stores k in component 0
  std::vector<double> arc;             // cumulative arc length (path tables)
  std::vector<std::string> labels;     // vertex labels, empty off-vertex
  Eigen::MatrixXd E;                   // (num k) x (bands), ascending per row
};

// Band energies E_1..E_J at each sampled k. Eigensolves parallelize over
// k-points into preassigned rows, so results do not depend on thread count.
DispersionTable dispersion(const PotentialGrid& V, const LatticeParams& p,
                           const std::vector<PathPoint>& path, int J, int threads = 0,
                           EigenBackend backend = EigenBackend::Auto);
DispersionTable dispersion(const PotentialGrid& V, const LatticeParams& p,
                           const std::vector<Eigen::Vector2d>& ks, int J, int threads = 0,
                           EigenBackend backend = EigenBackend::Auto);
DispersionTable dispersion_1d(const PotentialGrid& V, double X, const std::vector<double>& ks,
                              int J, int threads = 0, EigenBackend backend = EigenBackend::Auto);

struct GapReport {
  int m = 0;
  double alpha = 0;      // max_k E_m
  double beta = 0;       // min_k E_{m+1}
  double width = 0;      // max(0, beta - alpha)
  double midgap = 0;     // (alpha + beta)/2
  double ratio = 0;      // 2*width/(alpha+beta), 0 when the gap is empty
  int argmax_k = 0;      // first attaining index on ties
  int argmin_k = 0;
};

GapReport gap_report(const DispersionTable& t, int m);

// 2 X^2 Vp / (2 pi^2 m^2 + X^2 Vp); every admissible 1D potential obeys it.
double upper_bound_1d(int m, double X, double Vp);

// (lamD_{m+1} + Vp - lamN_m) / (lamN_{m+1} + Vp + lamN_m) clamped to [0, 2],
// from Dirichlet/Neumann Laplacian eigenvalues on the fundamental domain
// (computed on an n x n element grid).
double upper_bound_2d(int m, const LatticeParams& p, double Vp, int n = 48);

struct BesselZeroTable {
  double j01 = 2.4048;  // first zero of J_0
  double j11 = 3.8317;  // first zero of J_1
  double j21 = 5.1356;  // first zero of J_2
};

// Newton-polished zeros (seeds as above unless overridden); 1e-14 accurate.
BesselZeroTable polished_bessel_zeros(const BesselZeroTable& seeds = {});

// 2 (j11^2 - j01^2) / (j11^2 + j01^2) = 0.86965224...; the high-contrast
// ceiling for every 2D gap ratio.
double high_contrast_g(const BesselZeroTable& zeros = polished_bessel_zeros());

// Sorted Dirichlet spectrum of a disjoint union of disks, lambda = (j_{l,s}/R)^2
// with angular multiplicity 2 for l >= 1.
std::vector<double> disk_union_spectrum(const std::vector<double>& radii, int count);

// Gap ratio 2(b-a)/(a+b) around the m-th gap of the disk-union spectrum.
double disk_union_gap_ratio(const std::vector<double>& radii, int m);

// Same for a union of intervals (Dirichlet), lambda = (pi s / L)^2.
double interval_union_gap_ratio(const std::vector<double>& lengths, int m);

// Max |E_j(k) - E_j(T k)| over matched pairs; T defaults to k -> -k. The
// sampling must be closed under T modulo the reciprocal lattice.
double symmetry_check(const DispersionTable& t, const Eigen::Matrix2d& T = -Eigen::Matrix2d::Identity());

struct ExtremaCheck {
  bool on_boundary = true;
  double excess = 0;            // worst interior-vs-path violation
  Eigen::Vector2d offending_k{0, 0};
};

// Do max E_m and min E_{m+1} over the full-zone table stay within tol of the
// values on the boundary-path table?
ExtremaCheck extrema_location_check(const DispersionTable& full, const DispersionTable& path,
                                    int m, double tol = 1e-8);

}  // namespace gapforge
