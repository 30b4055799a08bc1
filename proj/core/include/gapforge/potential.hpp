#pragma once

#include <Eigen/Dense>

#include "gapforge/errors.hpp"

namespace gapforge {

// Potential samples on the unit torus: 1D at x = l*h, 2D at (i*h, j*h) with
// h = 1/n and flat index i + n*j. No duplicated endpoint.
struct PotentialGrid {
  int dim = 2;        // 1 or 2
  int n = 0;          // points per axis
  double V_plus = 0;  // admissible ceiling, values stay in [0, V_plus]
  Eigen::ArrayXd v;   // size n (1D) or n*n (2D)

  int size() const { return dim == 1 ? n : n * n; }

  void validate() const {
    if (dim != 1 && dim != 2) throw config_error("potential dim must be 1 or 2");
    if (n < 4) throw config_error("potential grid needs n >= 4");
    if (v.size() != size()) throw config_error("potential value count does not match grid");
    if (!(V_plus >= 0)) throw config_error("V_plus must be nonnegative");
    if ((v < -1e-12).any() || (v > V_plus * (1 + 1e-12) + 1e-12).any())
      throw config_error("potential values outside [0, V_plus]");
  }
};

}  // namespace gapforge
