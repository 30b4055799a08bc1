#pragma once

#include <Eigen/Dense>

#include "gapforge/bloch.hpp"

namespace gapforge {

enum class EigenBackend { Auto, Dense, ShiftInvert };

struct EigenPairs {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // orthonormal columns, one per value
  double max_residual = 0;   // max ||H x - lambda x|| / max(1, |lambda|)
  int iterations = 0;
  EigenBackend backend_used = EigenBackend::Dense;
};

// Lowest `count` eigenpairs of a Hermitian matrix. Auto picks the dense
// decomposition for dim <= 600 and shift-invert block Lanczos above (the
// crossover keeps band sweeps inside their runtime budgets on one core).
// Throws numeric_error if the iterative backend misses the residual tolerance
// within its restart budget.
EigenPairs smallest_eigenpairs(const SparseHermitian& H, int count, double tol = 1e-9,
                               EigenBackend backend = EigenBackend::Auto,
                               const Eigen::MatrixXcd* warm_start = nullptr);

}  // namespace gapforge
