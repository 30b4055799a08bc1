#include "gapforge/hill.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "gapforge/bands.hpp"
#include "gapforge/errors.hpp"

namespace gapforge {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// cosh(sqrt(t)) for t > 0, cos(sqrt(-t)) for t < 0; entire in t. Saturated at
// sqrt(t) = 690 -- the pair (C_even, S_even) then behaves like a slightly
// weaker barrier, which keeps det = 1 and the sign pattern of the dispersion
// function intact, and only matters where |D| is astronomically large anyway.
double C_even(double t) {
  if (t > 476100.0) t = 476100.0;  // 690^2
  if (t > 0) return std::cosh(std::sqrt(t));
  return std::cos(std::sqrt(-t));
}

// sinh(sqrt(t))/sqrt(t) resp. sin(sqrt(-t))/sqrt(-t); S_even(0) = 1.
double S_even(double t) {
  if (t > 476100.0) t = 476100.0;
  double a = std::abs(t);
  if (a < 1e-8) return 1.0 + t / 6.0 + t * t / 120.0;
  double s = std::sqrt(a);
  return t > 0 ? std::sinh(s) / s : std::sin(s) / s;
}

// Propagates (psi, psi') across a constant piece: psi'' = (v - E) psi.
Eigen::Matrix2d interval_propagator(double v, double E, double L) {
  double w = v - E;
  double t = w * L * L;
  double c = C_even(t), s = L * S_even(t);
  Eigen::Matrix2d P;
  P << c, s, w * s, c;
  return P;
}

// Ascending roots of Delta(E) = tau. Edge mode (tau = +-1) additionally hunts
// tangencies: a closed gap shows up as a local minimum of phi = 1 - tau*Delta
// touching zero, and a barely-open gap as a dip the coarse scan would step
// over. Both are resolved by zooming on the local minimum; the open case is
// decided FIRST (phi_min < 0) so that thin open gaps are never collapsed into
// double roots.
std::vector<double> scan_level_roots(const std::function<double(double)>& Delta,
                                     double tau, bool edge_mode, int need,
                                     double X, double Emax) {
  auto phi = [&](double E) {
    double d = Delta(E);
    return edge_mode ? 1.0 - tau * d : d - tau;
  };
  std::vector<double> roots;
  auto bisect_into = [&](double a, double b, double fa, double fb) {
    (void)fb;
    for (int it = 0; it < 100; ++it) {
      double mid = 0.5 * (a + b), fm = phi(mid);
      if ((fm < 0) == (fa < 0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    roots.push_back(0.5 * (a + b));
  };
  auto refine_touch = [&](double a, double b) {
    constexpr int kSub = 32;
    double xs[kSub + 1], fs[kSub + 1];
    for (int pass = 0; pass < 80; ++pass) {
      int jmin = 0;
      for (int j = 0; j <= kSub; ++j) {
        xs[j] = a + (b - a) * j / kSub;
        fs[j] = phi(xs[j]);
        if (fs[j] < fs[jmin]) jmin = j;
      }
      if (fs[jmin] < 0.0) {
        // Open after all: take the outermost crossings only. Roundoff at an
        // exact tangency can wiggle the bottom samples across zero many
        // times; everything between the flanks is noise, and a pair this
        // close is folded into "closed" by the caller's width threshold.
        int jl = jmin, jr = jmin;
        while (jl > 0 && fs[jl - 1] < 0) --jl;
        while (jr < kSub && fs[jr + 1] < 0) ++jr;
        if (jl > 0) bisect_into(xs[jl - 1], xs[jl], fs[jl - 1], fs[jl]);
        if (jr < kSub) bisect_into(xs[jr], xs[jr + 1], fs[jr], fs[jr + 1]);
        if (jl == 0 || jr == kSub) {
          // dip runs out of the window: rescan the flank that escaped
          if (jl == 0) bisect_into(a - (b - a), xs[0], phi(a - (b - a)), fs[0]);
          if (jr == kSub) bisect_into(xs[kSub], b + (b - a), fs[kSub], phi(b + (b - a)));
        }
        return;
      }
      if (b - a < 1e-12 * std::max(1.0, std::abs(a))) {
        roots.push_back(xs[jmin]);  // tangency: double eigenvalue
        roots.push_back(xs[jmin]);
        return;
      }
      a = xs[jmin > 0 ? jmin - 1 : 0];
      b = xs[jmin < kSub ? jmin + 1 : kSub];
    }
    roots.push_back(0.5 * (a + b));
    roots.push_back(0.5 * (a + b));
  };

  double step = std::min(1.0, (kPi / X) * (kPi / X) / 10.0) / 4.0;
  // The 1e-6 offset keeps samples off exact tangency points (for constant
  // potentials they sit at rational multiples of the step); f1 >= 0 below
  // still catches a sample that lands on one despite the offset.
  double E0 = (1e-6 - 2.0) * step, f0 = phi(E0);
  double E1 = E0 + step, f1 = phi(E1);
  if ((f0 < 0) != (f1 < 0)) bisect_into(E0, E1, f0, f1);
  while (E1 < Emax && static_cast<int>(roots.size()) < need) {
    double E2 = E1 + step, f2 = phi(E2);
    if ((f1 < 0) != (f2 < 0)) {
      bisect_into(E1, E2, f1, f2);
    } else if (edge_mode && f0 > 0 && f1 >= 0 && f2 > 0 && f1 < f0 && f1 <= f2) {
      refine_touch(E0, E2);
    }
    E0 = E1;
    f0 = f1;
    E1 = E2;
    f1 = f2;
  }
  std::sort(roots.begin(), roots.end());
  if (static_cast<int>(roots.size()) > need) roots.resize(need);
  return roots;
}

GapEdges1D edges_from_scan(const std::function<double(double)>& Delta, int m,
                           double X, double Vp) {
  if (m < 1) throw config_error("gap index must be >= 1");
  double tau = (m % 2 == 1) ? -1.0 : 1.0;
  double Emax = (m + 2) * kPi / X * ((m + 2) * kPi / X) + Vp + 10.0;
  auto roots = scan_level_roots(Delta, tau, true, m + 1, X, Emax);
  if (static_cast<int>(roots.size()) < m + 1)
    throw numeric_error("dispersion root scan exhausted before requested gap");
  GapEdges1D e;
  e.alpha = roots[m - 1];
  e.beta = roots[m];
  // Threshold sits above the sqrt(eps)-wide sliver a roundoff-negative
  // tangency can leave, and well below any physically open gap we resolve.
  e.closed = (e.beta - e.alpha) <= 1e-7 * std::max(1.0, std::abs(e.beta));
  return e;
}

// 5-point Gauss-Legendre on [-1, 1]
constexpr double kGLx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                            0.5384693101056831, 0.9061798459386640};
constexpr double kGLw[5] = {0.2369268850561891, 0.4786286704993665,
                            0.5688888888888889, 0.4786286704993665,
                            0.2369268850561891};

}  // namespace

StepPotential StepPotential::single_barrier(double X, double Vp, double b) {
  StepPotential V;
  V.X = X;
  V.V_plus = Vp;
  if (b <= 0) {
    V.breakpoints = {0.0};
    V.values = {0.0};
  } else if (b >= X) {
    V.breakpoints = {0.0};
    V.values = {Vp};
  } else {
    V.breakpoints = {0.0, X - b};
    V.values = {0.0, Vp};
  }
  return V;
}

StepPotential StepPotential::replicated_barrier(double X, double Vp, int m, double frac) {
  if (m < 1) throw config_error("cell count must be >= 1");
  StepPotential V;
  V.X = X;
  V.V_plus = Vp;
  double cell = X / m;
  for (int j = 0; j < m; ++j) {
    V.breakpoints.push_back(j * cell);
    V.values.push_back(0.0);
    V.breakpoints.push_back(j * cell + (1.0 - frac) * cell);
    V.values.push_back(Vp);
  }
  return V;
}

void StepPotential::validate() const {
  if (!(X > 0)) throw config_error("period must be positive");
  if (!(V_plus >= 0)) throw config_error("potential ceiling must be >= 0");
  if (breakpoints.empty() || breakpoints.size() != values.size())
    throw config_error("breakpoints and values must be non-empty and equal-length");
  double slop = 1e-9 * std::max(1.0, V_plus);
  for (size_t i = 0; i < breakpoints.size(); ++i) {
    if (breakpoints[i] < 0 || breakpoints[i] >= X)
      throw config_error("breakpoints must lie in [0, X)");
    if (i > 0 && breakpoints[i] <= breakpoints[i - 1])
      throw config_error("breakpoints must be strictly ascending");
    if (values[i] < -slop || values[i] > V_plus + slop)
      throw config_error("potential values must lie in [0, V_plus]");
  }
}

int StepPotential::interval_of(double x) const {
  double xm = x - X * std::floor(x / X);
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), xm);
  if (it == breakpoints.begin()) return intervals() - 1;  // before first cut: wrap
  return static_cast<int>(it - breakpoints.begin()) - 1;
}

double StepPotential::interval_length(int i) const {
  if (i + 1 < intervals()) return breakpoints[i + 1] - breakpoints[i];
  return X - breakpoints.back() + breakpoints.front();
}

double StepPotential::value_at(double x) const { return values[interval_of(x)]; }

double StepPotential::ceiling_measure() const {
  double s = 0;
  for (int i = 0; i < intervals(); ++i)
    if (values[i] >= 0.5 * V_plus) s += interval_length(i);
  return s;
}

int StepPotential::transitions() const {
  int q = intervals(), n = 0;
  for (int i = 0; i < q; ++i)
    if (values[i] != values[(i + q - 1) % q]) ++n;
  return n;
}

PotentialGrid StepPotential::sample(int n) const {
  PotentialGrid g;
  g.dim = 1;
  g.n = n;
  g.V_plus = V_plus;
  g.v.resize(n);
  for (int l = 0; l < n; ++l) g.v[l] = value_at(l * X / n);
  return g;
}

double kp_discriminant(double E, double b, double X, double Vp) {
  double a = X - b;
  double K2 = E, Q2 = Vp - E;
  return (Q2 - K2) * a * b / 2.0 * S_even(Q2 * b * b) * S_even(-K2 * a * a) +
         C_even(Q2 * b * b) * C_even(-K2 * a * a);
}

Eigen::Matrix2d step_transfer_matrix(const StepPotential& V, double E) {
  Eigen::Matrix2d M = Eigen::Matrix2d::Identity();
  for (int i = 0; i < V.intervals(); ++i)
    M = interval_propagator(V.values[i], E, V.interval_length(i)) * M;
  return M;
}

double step_discriminant(const StepPotential& V, double E) {
  // Scaled product: deep inside a high-contrast gap the entries outgrow
  // doubles; rescaling keeps the trace sign exact, and no rescale ever fires
  // where |Delta| <= 1 (so band/edge locations are unaffected).
  Eigen::Matrix2d M = Eigen::Matrix2d::Identity();
  double logboost = 0;
  for (int i = 0; i < V.intervals(); ++i) {
    M = interval_propagator(V.values[i], E, V.interval_length(i)) * M;
    double mx = M.cwiseAbs().maxCoeff();
    if (mx > 1e100) {
      M /= mx;
      logboost += std::log(mx);
    }
  }
  double half_tr = 0.5 * M.trace();
  if (logboost == 0) return half_tr;
  double lg = std::log(std::max(std::abs(half_tr), 1e-300)) + logboost;
  if (lg > 575.0) return half_tr > 0 ? 1e250 : -1e250;  // saturate, sign exact
  return half_tr * std::exp(logboost);
}

GapEdges1D kp_gap_edges(double b, double X, double Vp, int m) {
  if (b < 0 || b > X) throw config_error("barrier width must lie in [0, X]");
  auto Delta = [&](double E) { return kp_discriminant(E, b, X, Vp); };
  return edges_from_scan(Delta, m, X, Vp);
}

GapEdges1D step_gap_edges(const StepPotential& V, int m) {
  V.validate();
  auto Delta = [&](double E) { return step_discriminant(V, E); };
  return edges_from_scan(Delta, m, V.X, V.V_plus);
}

std::vector<double> transfer_matrix_spectrum(const StepPotential& V, double k, int count) {
  V.validate();
  if (count < 1) throw config_error("level count must be >= 1");
  double tau = std::cos(k * V.X);
  bool edge = std::abs(std::abs(tau) - 1.0) < 1e-12;
  if (edge) tau = tau > 0 ? 1.0 : -1.0;
  auto Delta = [&](double E) { return step_discriminant(V, E); };
  double Emax = (count + 2) * kPi / V.X * ((count + 2) * kPi / V.X) + V.V_plus + 10.0;
  auto roots = scan_level_roots(Delta, tau, edge, count, V.X, Emax);
  if (static_cast<int>(roots.size()) < count)
    throw numeric_error("band scan exhausted before finding requested levels");
  return roots;
}

StepEigenfunction::StepEigenfunction(const StepPotential& V, double E, int bloch_sign)
    : V_(V), E_(E) {
  const int q = V.intervals();
  Eigen::Matrix2d M = step_transfer_matrix(V, E);
  Eigen::Matrix2d A = M - static_cast<double>(bloch_sign) * Eigen::Matrix2d::Identity();
  Eigen::Vector2d w;
  double r0 = A.row(0).norm(), r1 = A.row(1).norm();
  if (std::max(r0, r1) < 1e-9 * (M.norm() + 1.0)) {
    w << 1, 0;  // M ~ sI: the whole plane is invariant
  } else if (r0 >= r1) {
    w << -A(0, 1), A(0, 0);
  } else {
    w << -A(1, 1), A(1, 0);
  }
  w.normalize();
  states_.resize(q);
  states_[0] = w;
  for (int i = 0; i + 1 < q; ++i)
    states_[i + 1] =
        interval_propagator(V.values[i], E, V.interval_length(i)) * states_[i];

  double nrm2 = 0;
  for (int i = 0; i < q; ++i) {
    double L = V.interval_length(i), wv = V.values[i] - E;
    const int chunks = 64;
    double h = L / chunks;
    for (int c = 0; c < chunks; ++c) {
      for (int g = 0; g < 5; ++g) {
        double xi = (c + 0.5 + 0.5 * kGLx[g]) * h;
        double t = wv * xi * xi;
        double p = C_even(t) * states_[i](0) + xi * S_even(t) * states_[i](1);
        nrm2 += 0.5 * h * kGLw[g] * p * p;
      }
    }
  }
  if (!(nrm2 > 0)) throw numeric_error("degenerate edge state normalization");
  double c = 1.0 / std::sqrt(nrm2);
  for (auto& s : states_) s *= c;
}

double StepEigenfunction::value(double x) const {
  double xm = x - V_.X * std::floor(x / V_.X);
  int i = V_.interval_of(xm);
  double xi = xm - V_.breakpoints[i];
  if (xi < 0) xi += V_.X;  // wrap interval starts at the last breakpoint
  double w = V_.values[i] - E_;
  double t = w * xi * xi;
  return C_even(t) * states_[i](0) + xi * S_even(t) * states_[i](1);
}

double StepEigenfunction::derivative(double x) const {
  double xm = x - V_.X * std::floor(x / V_.X);
  int i = V_.interval_of(xm);
  double xi = xm - V_.breakpoints[i];
  if (xi < 0) xi += V_.X;
  double w = V_.values[i] - E_;
  double t = w * xi * xi;
  return w * xi * S_even(t) * states_[i](0) + C_even(t) * states_[i](1);
}

Eigen::VectorXd StepEigenfunction::sample(int n) const {
  Eigen::VectorXd out(n);
  for (int l = 0; l < n; ++l) out[l] = value(l * V_.X / n);
  return out;
}

std::vector<double> StepEigenfunction::zeros(bool of_derivative, int scan) const {
  auto f = [&](double x) { return of_derivative ? derivative(x) : value(x); };
  std::vector<std::pair<double, double>> cand;  // (location, |residual|)
  double X = V_.X;
  double fprev = f(0.0);
  double fmax = std::abs(fprev);
  for (int l = 0; l < scan; ++l) {
    double x2 = (l + 1) * X / scan;
    double f2 = f(x2);
    fmax = std::max(fmax, std::abs(f2));
    if ((fprev < 0) != (f2 < 0)) {
      double a = l * X / scan, b = x2, fa = fprev;
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (a + b), fm = f(mid);
        if ((fm < 0) == (fa < 0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      double z = 0.5 * (a + b);
      cand.emplace_back(z >= X ? z - X : z, std::abs(f(z)));
    }
    fprev = f2;
  }
  // An anti-periodic state jumps sign across the period seam; bisection
  // converges onto that discontinuity with a large residual. Real zeros
  // come out with |f| at roundoff level, so filter on the residual.
  std::vector<double> zs;
  for (auto& [z, r] : cand)
    if (r <= 1e-6 * std::max(fmax, 1e-300)) zs.push_back(z);
  return zs;
}

EdgeFunctions edge_eigenfunctions(const StepPotential& V, int m) {
  GapEdges1D e = step_gap_edges(V, m);
  if (e.closed || e.beta - e.alpha <= 1e-10 * std::max(1.0, std::abs(e.beta)))
    throw numeric_error("empty gap: edge states are not isolated");
  int s = (m % 2 == 1) ? -1 : 1;
  return EdgeFunctions{e, s, StepEigenfunction(V, e.alpha, s),
                       StepEigenfunction(V, e.beta, s)};
}

namespace {

StepPotential from_cuts(double X, double Vp, std::vector<double> cuts,
                        const std::function<bool(double)>& in_ceiling) {
  StepPotential out;
  out.X = X;
  out.V_plus = Vp;
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [&](double a, double b) { return b - a < 1e-11 * X; }),
             cuts.end());
  if (cuts.empty()) {
    out.breakpoints = {0.0};
    out.values = {in_ceiling(0.5 * X) ? Vp : 0.0};
    return out;
  }
  int q = static_cast<int>(cuts.size());
  std::vector<double> vals(q);
  for (int i = 0; i < q; ++i) {
    double right = (i + 1 < q) ? cuts[i + 1] : cuts[0] + X;
    vals[i] = in_ceiling(0.5 * (cuts[i] + right)) ? Vp : 0.0;
  }
  // merge neighbors with equal value (cyclically)
  for (int i = 0; i < q; ++i) {
    if (vals[i] != vals[(i + q - 1) % q]) {
      out.breakpoints.push_back(cuts[i]);
      out.values.push_back(vals[i]);
    }
  }
  if (out.breakpoints.empty()) {
    out.breakpoints = {cuts[0]};
    out.values = {vals[0]};
  }
  return out;
}

}  // namespace

StepPotential rearrange_step_1d(const StepPotential& V, const EdgeFunctions& ef) {
  const double X = V.X, Vp = V.V_plus;
  const double al = ef.edges.alpha, be = ef.edges.beta;
  auto r = [&](double x) {
    double pb = ef.psi_beta.value(x), pa = ef.psi_alpha.value(x);
    return pb * pb / be - pa * pa / al;
  };
  const int N = 2048;
  std::vector<double> fx(N);
  for (int l = 0; l < N; ++l) fx[l] = r(l * X / N);
  std::vector<double> cuts;
  for (int l = 0; l < N; ++l) {
    double f1 = fx[l], f2 = fx[(l + 1) % N];
    if ((f1 > 0) == (f2 > 0)) continue;
    double a = l * X / N, b = (l + 1) * X / N;
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (a + b);
      if ((r(mid) > 0) == (f1 > 0)) {
        a = mid;
      } else {
        b = mid;
      }
    }
    double z = 0.5 * (a + b);
    cuts.push_back(z >= X ? z - X : z);
  }
  // strict r > 0 takes the ceiling; ties fall to the floor set
  return from_cuts(X, Vp, cuts, [&](double x) { return r(x) > 0; });
}

double ceiling_set_difference(const StepPotential& V1, const StepPotential& V2) {
  std::vector<double> pts = V1.breakpoints;
  pts.insert(pts.end(), V2.breakpoints.begin(), V2.breakpoints.end());
  std::sort(pts.begin(), pts.end());
  double X = V1.X, diff = 0;
  int n = static_cast<int>(pts.size());
  for (int i = 0; i < n; ++i) {
    double a = pts[i], b = (i + 1 < n) ? pts[i + 1] : pts[0] + X;
    double mid = 0.5 * (a + b);
    bool in1 = V1.value_at(mid) >= 0.5 * V1.V_plus;
    bool in2 = V2.value_at(mid) >= 0.5 * V2.V_plus;
    if (in1 != in2) diff += b - a;
  }
  return diff;
}

Optimize1DResult optimize_1d(int m, double X, double Vp,
                             const std::optional<StepPotential>& init,
                             int max_iters, double set_tol_rel) {
  if (m < 1) throw config_error("gap index must be >= 1");
  StepPotential V = init ? *init : StepPotential::replicated_barrier(X, Vp, m, 0.8);
  V.validate();
  Optimize1DResult res;
  for (int it = 0; it < max_iters; ++it) {
    EdgeFunctions ef = edge_eigenfunctions(V, m);
    StepPotential Vn = rearrange_step_1d(V, ef);
    double dlt = ceiling_set_difference(V, Vn);
    IterationRecord1D rec;
    rec.G = ef.edges.ratio();
    rec.alpha = ef.edges.alpha;
    rec.beta = ef.edges.beta;
    rec.ceiling_measure = Vn.ceiling_measure();
    rec.transitions = Vn.transitions();
    rec.set_change = dlt;
    res.trace.push_back(rec);
    V = Vn;
    res.iterations = it + 1;
    if (dlt < set_tol_rel * X) {
      res.stationary = true;
      break;
    }
  }
  GapEdges1D e = step_gap_edges(V, m);
  res.V = V;
  res.alpha = e.alpha;
  res.beta = e.beta;
  res.G = e.ratio();
  return res;
}

Certificates1D verify_1d_certificates(const StepPotential& V, int m, double tol) {
  V.validate();
  Certificates1D c;
  EdgeFunctions ef = edge_eigenfunctions(V, m);
  c.gap_ratio = ef.edges.ratio();
  c.upper_bound = upper_bound_1d(m, V.X, V.V_plus);
  c.transitions = V.transitions();

  double Vp = V.V_plus, X = V.X;
  double bb = 0;
  for (int i = 0; i < V.intervals(); ++i)
    if (std::min(V.values[i], Vp - V.values[i]) <= tol * std::max(Vp, 1.0))
      bb += V.interval_length(i);
  c.bangbang_fraction = bb / X;

  // Pointwise exchange rule: the ratio must be >= 0 on the ceiling set and
  // <= 0 on the floor set. Sampled away from the cuts (2% guard band per
  // interval) where the sign is meaningful; normalized by the ratio's range.
  auto r = [&](double x) {
    double pb = ef.psi_beta.value(x), pa = ef.psi_alpha.value(x);
    return pb * pb / ef.edges.beta - pa * pa / ef.edges.alpha;
  };
  double rmax = 0, viol = 0;
  for (int i = 0; i < V.intervals(); ++i) {
    double L = V.interval_length(i);
    bool ceil = V.values[i] >= 0.5 * Vp;
    for (int jj = 0; jj < 256; ++jj) {
      double x = V.breakpoints[i] + L * (0.02 + 0.96 * jj / 255.0);
      double rv = r(x);
      rmax = std::max(rmax, std::abs(rv));
      viol = std::max(viol, ceil ? -rv : rv);
    }
  }
  c.sign_violation = rmax > 0 ? std::max(viol, 0.0) / rmax : 0.0;

  auto circdist = [X](double a, double b) {
    double d = std::abs(a - b);
    d = d - X * std::floor(d / X);
    return std::min(d, X - d);
  };
  // Wherever one edge state vanishes, the other's derivative must vanish
  // too (the implication runs from value zeros to derivative zeros: the
  // derivative picks up extra critical points from oscillation in the well).
  auto cov = [&](const StepEigenfunction& fder, const StepEigenfunction& fval) {
    auto zd = fder.zeros(true);
    auto zv = fval.zeros(false);
    if (zd.empty() || zv.empty()) return X;
    double worst = 0;
    for (double z : zv) {
      double best = X;
      for (double y : zd) best = std::min(best, circdist(z, y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  c.covanish_beta_alpha = cov(ef.psi_beta, ef.psi_alpha);
  c.covanish_alpha_beta = cov(ef.psi_alpha, ef.psi_beta);

  // ceiling-set mismatch under a one-cell shift
  StepPotential Vs = V;
  double shift = X / m;
  std::vector<std::pair<double, double>> sh;
  for (int i = 0; i < V.intervals(); ++i) {
    double b = V.breakpoints[i] + shift;
    if (b >= X) b -= X;
    sh.emplace_back(b, V.values[i]);
  }
  std::sort(sh.begin(), sh.end());
  Vs.breakpoints.clear();
  Vs.values.clear();
  for (auto& p : sh) {
    Vs.breakpoints.push_back(p.first);
    Vs.values.push_back(p.second);
  }
  c.period_residual = ceiling_set_difference(V, Vs);
  return c;
}

OptimalBResult optimal_b_search(double X, double Vp, double xtol) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  auto G = [&](double w) { return kp_gap_edges(w, X, Vp, 1).ratio(); };
  double a = 1e-6 * X, b = X * (1.0 - 1e-6);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = G(x1), f2 = G(x2);
  while (b - a > xtol * X) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = G(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = G(x1);
    }
  }
  double bm = 0.5 * (a + b);
  return {bm, G(bm)};
}

double equal_interval_high_contrast() {
  // length ratio 2 between consecutive Dirichlet levels of equal cells
  return 2.0 * (4.0 - 1.0) / (4.0 + 1.0);
}

}  // namespace gapforge
