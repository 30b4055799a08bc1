#include "gapforge/bands.hpp"

#include <algorithm>
#include <cmath>

#include "gapforge/bloch.hpp"
#include "gapforge/util.hpp"

namespace gapforge {

namespace {

DispersionTable solve_table(const PotentialGrid& V, const LatticeParams& p,
                            std::vector<Eigen::Vector2d> ks, int J, int threads,
                            EigenBackend backend, int dim, double X) {
  V.validate();
  if (J < 1) throw config_error("need at least one band");
  DispersionTable t;
  t.dim = dim;
  t.params = p;
  t.X = X;
  t.k = std::move(ks);
  t.E.resize(t.k.size(), J);
  if (threads <= 0) threads = default_thread_count();
  parallel_for(static_cast<int>(t.k.size()), threads, [&](int i) {
    SparseHermitian H = dim == 2 ? assemble_bloch_2d(p, t.k[i], V)
                                 : assemble_bloch_1d(X, t.k[i][0], V);
    const EigenPairs ep = smallest_eigenpairs(H, J, 1e-9, backend);
    t.E.row(i) = ep.values.transpose();
  });
  return t;
}

}  // namespace

DispersionTable dispersion(const PotentialGrid& V, const LatticeParams& p,
                           const std::vector<PathPoint>& path, int J, int threads,
                           EigenBackend backend) {
  std::vector<Eigen::Vector2d> ks;
  ks.reserve(path.size());
  for (const auto& pp : path) ks.push_back(pp.k);
  DispersionTable t = solve_table(V, p, std::move(ks), J, threads, backend, 2, 1.0);
  t.arc.reserve(path.size());
  t.labels.reserve(path.size());
  for (const auto& pp : path) {
    t.arc.push_back(pp.arc);
    t.labels.push_back(pp.label);
  }
  return t;
}

DispersionTable dispersion(const PotentialGrid& V, const LatticeParams& p,
                           const std::vector<Eigen::Vector2d>& ks, int J, int threads,
                           EigenBackend backend) {
  return solve_table(V, p, ks, J, threads, backend, 2, 1.0);
}

DispersionTable dispersion_1d(const PotentialGrid& V, double X, const std::vector<double>& ks,
                              int J, int threads, EigenBackend backend) {
  std::vector<Eigen::Vector2d> k2;
  k2.reserve(ks.size());
  for (double k : ks) k2.emplace_back(k, 0.0);
  return solve_table(V, LatticeParams::square(), std::move(k2), J, threads, backend, 1, X);
}

GapReport gap_report(const DispersionTable& t, int m) {
  if (m < 1 || m + 1 > t.E.cols()) throw config_error("gap index needs m+1 computed bands");
  if (t.E.rows() < 1) throw config_error("empty dispersion table");
  GapReport r;
  r.m = m;
  r.alpha = t.E(0, m - 1);
  r.beta = t.E(0, m);
  for (int i = 1; i < t.E.rows(); ++i) {
    if (t.E(i, m - 1) > r.alpha) {
      r.alpha = t.E(i, m - 1);
      r.argmax_k = i;
    }
    if (t.E(i, m) < r.beta) {
      r.beta = t.E(i, m);
      r.argmin_k = i;
    }
  }
  r.width = std::max(0.0, r.beta - r.alpha);
  r.midgap = 0.5 * (r.alpha + r.beta);
  r.ratio = r.width > 0 && r.midgap > 0 ? r.width / r.midgap : 0.0;
  return r;
}

double upper_bound_1d(int m, double X, double Vp) {
  if (m < 1 || !(X > 0) || !(Vp >= 0)) throw config_error("upper_bound_1d: bad arguments");
  return 2.0 * X * X * Vp / (2.0 * M_PI * M_PI * m * m + X * X * Vp);
}

double upper_bound_2d(int m, const LatticeParams& p, double Vp, int n) {
  if (m < 1 || !(Vp >= 0)) throw config_error("upper_bound_2d: bad arguments");
  const SparseHermitian D = assemble_laplacian_bc(n, BoundaryCondition::Dirichlet, p);
  const SparseHermitian Ne = assemble_laplacian_bc(n, BoundaryCondition::Neumann, p);
  const Eigen::VectorXd lamD = smallest_eigenpairs(D, m + 1).values;
  const Eigen::VectorXd lamN = smallest_eigenpairs(Ne, m + 1).values;
  const double num = lamD[m] + Vp - lamN[m - 1];
  const double den = lamN[m] + Vp + lamN[m - 1];
  if (den <= 0) return 2.0;
  return std::clamp(num / den, 0.0, 2.0);
}

namespace {

double bessel_newton(int nu, double seed) {
  double x = seed;
  for (int it = 0; it < 80; ++it) {
    const double f = std::cyl_bessel_j(nu, x);
    const double fp = nu == 0 ? -std::cyl_bessel_j(1, x)
                              : std::cyl_bessel_j(nu - 1, x) - nu / x * std::cyl_bessel_j(nu, x);
    const double step = f / fp;
    x -= step;
    if (std::abs(step) < 1e-15 * x) break;
  }
  return x;
}

}  // namespace

BesselZeroTable polished_bessel_zeros(const BesselZeroTable& seeds) {
  BesselZeroTable z;
  z.j01 = bessel_newton(0, seeds.j01);
  z.j11 = bessel_newton(1, seeds.j11);
  z.j21 = bessel_newton(2, seeds.j21);
  return z;
}

double high_contrast_g(const BesselZeroTable& zeros) {
  const double a = zeros.j01 * zeros.j01, b = zeros.j11 * zeros.j11;
  return 2.0 * (b - a) / (b + a);
}

namespace {

// Zeros of J_l in (0, cap], bracketed by a fine scan then bisected. Spacing of
// consecutive zeros exceeds the scan step, so no zero is skipped.
std::vector<double> bessel_zeros_upto(int l, double cap) {
  std::vector<double> out;
  const double step = 0.25;
  double x0 = l > 0 ? double(l) : 1e-3;
  double f0 = std::cyl_bessel_j(l, x0);
  for (double x1 = x0 + step; x0 < cap; x0 = x1, x1 += step) {
    const double f1 = std::cyl_bessel_j(l, x1);
    if ((f0 > 0) != (f1 > 0)) {
      double a = x0, b = x1, fa = f0;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = std::cyl_bessel_j(l, mid);
        if ((fa > 0) == (fm > 0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      out.push_back(0.5 * (a + b));
    }
    f0 = f1;
  }
  return out;
}

}  // namespace

std::vector<double> disk_union_spectrum(const std::vector<double>& radii, int count) {
  if (radii.empty()) throw config_error("need at least one disk");
  for (double R : radii)
    if (!(R > 0)) throw config_error("disk radii must be positive");
  if (count < 1) throw config_error("count must be positive");
  // Every candidate among the `count` smallest zeros (with multiplicity) lies
  // below the count-th zero of J_0.
  const auto z0 = bessel_zeros_upto(0, (count + 2) * M_PI + 4.0);
  const double cap = z0[std::min<std::size_t>(count, z0.size() - 1)] + 1e-9;
  std::vector<double> zs;  // zeros with angular multiplicity expanded
  for (int l = 0; l <= static_cast<int>(cap) + 1; ++l) {
    const auto zl = bessel_zeros_upto(l, cap);
    if (l > 0 && zl.empty()) break;
    for (double z : zl) {
      zs.push_back(z);
      if (l > 0) zs.push_back(z);
    }
  }
  std::vector<double> lam;
  for (double R : radii)
    for (double z : zs) lam.push_back((z / R) * (z / R));
  std::sort(lam.begin(), lam.end());
  if (static_cast<int>(lam.size()) < count) throw numeric_error("disk spectrum enumeration too short");
  lam.resize(count);
  return lam;
}

double disk_union_gap_ratio(const std::vector<double>& radii, int m) {
  const auto lam = disk_union_spectrum(radii, m + 1);
  const double a = lam[m - 1], b = lam[m];
  return std::max(0.0, 2.0 * (b - a) / (a + b));
}

double interval_union_gap_ratio(const std::vector<double>& lengths, int m) {
  if (lengths.empty()) throw config_error("need at least one interval");
  std::vector<double> lam;
  for (double L : lengths) {
    if (!(L > 0)) throw config_error("interval lengths must be positive");
    for (int s = 1; s <= m + 1; ++s) lam.push_back(M_PI * M_PI * s * s / (L * L));
  }
  std::sort(lam.begin(), lam.end());
  const double a = lam[m - 1], b = lam[m];
  return std::max(0.0, 2.0 * (b - a) / (a + b));
}

double symmetry_check(const DispersionTable& t, const Eigen::Matrix2d& T) {
  const int q = static_cast<int>(t.k.size());
  const Basis G = t.dim == 2 ? reciprocal_basis(basis_from_params(t.params))
                             : Basis((Basis() << 2.0 * M_PI / t.X, 0, 0, 1).finished());
  double worst = 0;
  for (int i = 0; i < q; ++i) {
    const Eigen::Vector2d target = T * t.k[i];
    int match = -1;
    double bd = 1e300;
    for (int j = 0; j < q; ++j) {
      Eigen::Vector2d d = t.k[j] - target;
      if (t.dim == 1) d[1] = 0;
      const Eigen::Vector2d folded = fold_to_voronoi(d, G);
      if (folded.norm() < bd) {
        bd = folded.norm();
        match = j;
      }
    }
    if (bd > 1e-9 * (1.0 + t.k[i].norm()))
      throw config_error("sampling not closed under the requested symmetry");
    worst = std::max(worst, (t.E.row(i) - t.E.row(match)).cwiseAbs().maxCoeff());
  }
  return worst;
}

ExtremaCheck extrema_location_check(const DispersionTable& full, const DispersionTable& path,
                                    int m, double tol) {
  const GapReport gf = gap_report(full, m);
  const GapReport gp = gap_report(path, m);
  ExtremaCheck out;
  const double over = gf.alpha - gp.alpha;   // interior max exceeding path max
  const double under = gp.beta - gf.beta;    // interior min undershooting path min
  out.excess = std::max(over, under);
  out.on_boundary = out.excess <= tol;
  out.offending_k = over >= under ? full.k[gf.argmax_k] : full.k[gf.argmin_k];
  return out;
}

}  // namespace gapforge
