#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace gapforge {

using Basis = Eigen::Matrix2d;  // columns are the two lattice vectors, det = 1

// Cell-shape parameters (a, b). The canonical moduli set is
//   b > 0, 0 <= a <= 1/2, a^2 + b^2 >= 1,
// with (0, 1) the square cell and (1/2, sqrt(3)/2) the triangular one.
struct LatticeParams {
  double a = 0.0;
  double b = 1.0;

  static LatticeParams square() { return {0.0, 1.0}; }
  static LatticeParams triangular();
  static LatticeParams named(const std::string& name);  // "square" | "triangular"

  bool canonical(double tol = 1e-12) const;
};

// B_{a,b} = [[1/sqrt(b), a/sqrt(b)], [0, sqrt(b)]]; unit cell volume 1.
Basis basis_from_params(const LatticeParams& p);

// Canonical parameters of the lattice spanned by the columns of B. Invariant
// under B -> Q * B * U for orthogonal Q and integer unimodular U, and under
// rescaling (volume is normalized away). Ties on the moduli boundary resolve
// to smallest a, then smallest b.
LatticeParams reduce_to_fundamental(const Basis& B);

// 2*pi*B^{-T}; columns generate the reciprocal lattice.
Basis reciprocal_basis(const Basis& B);

struct PathPoint {
  Eigen::Vector2d k;
  double arc = 0.0;        // cumulative arc length from the path start
  std::string label;       // vertex name at vertices, empty otherwise
};

// Vertex polygon Gamma->X->M->Gamma (square) or Gamma->K->M->Gamma
// (triangular), each side sampled uniformly with `points_per_side` points,
// start inclusive / end exclusive, so the closed path has 3*points_per_side
// distinct points. Vertices are derived from the reciprocal basis.
std::vector<PathPoint> ibz_boundary_path(const std::string& kind, int points_per_side);

// Uniform sampling of half the Brillouin zone: candidates on a regular grid in
// reciprocal coordinates (plus Gamma), folded into the Voronoi cell of the
// origin in the reciprocal lattice, identified under k ~ -k, deduplicated.
// Every returned k satisfies |k| <= |k - g| + 1e-9 over nearby reciprocal g.
std::vector<Eigen::Vector2d> half_bz_grid(const Basis& B, int resolution);

// Fold k into the Voronoi cell of the origin of the lattice spanned by G's
// columns (minimum-norm representative of k + G*Z^2).
Eigen::Vector2d fold_to_voronoi(const Eigen::Vector2d& k, const Basis& G);

}  // namespace gapforge
