#include "gapforge/lattice.hpp"

#include <cmath>
#include <cstdlib>

#include "gapforge/errors.hpp"

namespace gapforge {

LatticeParams LatticeParams::triangular() { return {0.5, std::sqrt(3.0) / 2.0}; }

LatticeParams LatticeParams::named(const std::string& name) {
  if (name == "square") return square();
  if (name == "triangular") return triangular();
  throw config_error("unknown lattice name: " + name);
}

bool LatticeParams::canonical(double tol) const {
  return b > 0.0 && a >= -tol && a <= 0.5 + tol && a * a + b * b >= 1.0 - tol;
}

Basis basis_from_params(const LatticeParams& p) {
  if (!(p.b > 0.0)) throw config_error("lattice parameter b must be positive");
  const double sb = std::sqrt(p.b);
  Basis B;
  B << 1.0 / sb, p.a / sb, 0.0, sb;
  return B;
}

Basis reciprocal_basis(const Basis& B) {
  if (std::abs(B.determinant()) < 1e-300) throw config_error("singular lattice basis");
  return 2.0 * M_PI * B.inverse().transpose();
}

LatticeParams reduce_to_fundamental(const Basis& Bin) {
  const double det = Bin.determinant();
  if (std::abs(det) < 1e-300) throw config_error("singular lattice basis");

  Basis B = Bin / std::sqrt(std::abs(det));
  Eigen::Vector2d v1 = B.col(0), v2 = B.col(1);

  // Gauss reduction: shortest vector first, subtract the nearest-integer
  // multiple, repeat. Terminates in a handful of steps for det-1 input.
  for (int it = 0; it < 64; ++it) {
    if (v1.squaredNorm() > v2.squaredNorm()) std::swap(v1, v2);
    const double mu = std::round(v2.dot(v1) / v1.squaredNorm());
    if (mu == 0.0) break;
    v2 -= mu * v1;
  }
  if (v1.squaredNorm() > v2.squaredNorm()) std::swap(v1, v2);
  if (v2.dot(v1) < 0.0) v2 = -v2;  // reflections are allowed: make the angle acute

  const double b = 1.0 / v1.squaredNorm();
  double a = v2.dot(v1) / v1.squaredNorm();

  // Gauss reduction leaves a in [0, 1/2 + eps]; snap boundary representatives.
  if (a > 0.5) a = 0.5;
  if (a < 0.0) a = 0.0;

  // Moduli-boundary ties (|v1| == |v2|, i.e. a^2 + b^2 == 1): both orderings of
  // the pair give the same (a, b) here, so the representative is already the
  // smallest-a one; just clean up roundoff against the circle.
  const double r2 = a * a + b * b;
  if (r2 < 1.0 && r2 > 1.0 - 1e-12) {
    const double corrected = std::sqrt(std::max(0.0, 1.0 - a * a));
    return {a, corrected};
  }
  return {a, b};
}

std::vector<PathPoint> ibz_boundary_path(const std::string& kind, int points_per_side) {
  if (points_per_side < 2) throw config_error("points_per_side must be >= 2");
  const LatticeParams p = LatticeParams::named(kind);
  const Basis G = reciprocal_basis(basis_from_params(p));
  const Eigen::Vector2d g1 = G.col(0), g2 = G.col(1);

  std::vector<Eigen::Vector2d> verts;
  std::vector<std::string> names;
  if (kind == "square") {
    verts = {{0.0, 0.0}, g1 / 2.0, (g1 + g2) / 2.0};
    names = {"Gamma", "X", "M"};
  } else {
    // Shortest reciprocal vectors; the zone corner K is equidistant from the
    // origin and two adjacent shortest vectors, M the midpoint of one of them.
    std::vector<Eigen::Vector2d> cand;
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        if (i || j) cand.push_back(double(i) * g1 + double(j) * g2);
    std::sort(cand.begin(), cand.end(),
              [](const auto& x, const auto& y) { return x.squaredNorm() < y.squaredNorm(); });
    const Eigen::Vector2d ga = cand[0];
    Eigen::Vector2d gb = cand[1];
    double best = 1e300;
    for (const auto& c : cand) {
      if (std::abs(c.squaredNorm() - ga.squaredNorm()) > 1e-9) continue;
      if ((c - ga).norm() < 1e-9 || (c + ga).norm() < 1e-9) continue;
      if ((c - ga).norm() < best) {
        best = (c - ga).norm();
        gb = c;
      }
    }
    Eigen::Matrix2d A;
    A.row(0) = 2.0 * ga.transpose();
    A.row(1) = 2.0 * gb.transpose();
    const Eigen::Vector2d rhs(ga.squaredNorm(), gb.squaredNorm());
    const Eigen::Vector2d K = A.fullPivLu().solve(rhs);
    verts = {{0.0, 0.0}, K, ga / 2.0};
    names = {"Gamma", "K", "M"};
  }

  std::vector<PathPoint> path;
  double arc = 0.0;
  for (int s = 0; s < 3; ++s) {
    const Eigen::Vector2d v0 = verts[s], v1 = verts[(s + 1) % 3];
    const double side = (v1 - v0).norm();
    for (int t = 0; t < points_per_side; ++t) {
      PathPoint pp;
      pp.k = v0 + (v1 - v0) * (double(t) / points_per_side);
      pp.arc = arc + side * double(t) / points_per_side;
      if (t == 0) pp.label = names[s];
      path.push_back(pp);
    }
    arc += side;
  }
  return path;
}

Eigen::Vector2d fold_to_voronoi(const Eigen::Vector2d& k, const Basis& G) {
  // Start from the nearest-integer reciprocal coordinates, then search a small
  // neighborhood; 2 shells cover every Voronoi cell of a reduced 2D lattice.
  const Eigen::Vector2d s = G.fullPivLu().solve(k);
  const double s0 = std::round(s[0]), s1 = std::round(s[1]);
  Eigen::Vector2d best = k - G * Eigen::Vector2d(s0, s1);
  double bn = best.squaredNorm();
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j) {
      const Eigen::Vector2d t = k - G * Eigen::Vector2d(s0 + i, s1 + j);
      if (t.squaredNorm() < bn - 1e-15) {
        bn = t.squaredNorm();
        best = t;
      }
    }
  return best;
}

std::vector<Eigen::Vector2d> half_bz_grid(const Basis& B, int resolution) {
  if (resolution < 1) throw config_error("half_bz_grid resolution must be >= 1");
  const Basis G = reciprocal_basis(B);

  std::vector<Eigen::Vector2d> cand;
  cand.emplace_back(0.0, 0.0);
  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j)
      cand.push_back(G * Eigen::Vector2d(-0.5 + double(i) / resolution,
                                         -0.5 + double(j) / resolution));

  std::vector<Eigen::Vector2d> out;
  constexpr double tol = 1e-9;
  for (auto& c : cand) {
    Eigen::Vector2d k = fold_to_voronoi(c, G);
    // canonical representative of {k, -k}: upper half plane, ties to kx >= 0
    if (k[1] < -tol || (std::abs(k[1]) <= tol && k[0] < -tol)) k = -k;
    bool dup = false;
    for (const auto& o : out)
      if ((o - k).norm() <= 1e-7 * (1.0 + k.norm())) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(k);
  }
  return out;
}

}  // namespace gapforge
