#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>

#include "gapforge/lattice.hpp"
#include "gapforge/potential.hpp"

namespace gapforge {

using SparseHermitian = Eigen::SparseMatrix<std::complex<double>>;

// (B^T B)^{-1}, symmetrized. Unit metric for the square cell.
Eigen::Matrix2d metric_from_basis(const Basis& B);

// 9-point discretization of -(B^{-T}grad + ik).(B^{-T}grad + ik) + V on the
// unit torus with h = 1/n and periodic wrap. Hermitian by construction; the
// assembled matrix uses index p = i + n*j.
//
// Stencil (x to the right, y up), N = metric, kp = B^{-1} k:
//    [  (N21+N12)/4h^2   -N22/h^2 - i kp2/h   -(N21+N12)/4h^2 ]
//    [ -N11/h^2 + i kp1/h   2(N11+N22)/h^2 + k.k + V   -N11/h^2 - i kp1/h ]
//    [ -(N21+N12)/4h^2   -N22/h^2 + i kp2/h    (N21+N12)/4h^2 ]
SparseHermitian assemble_bloch_2d(const LatticeParams& p, const Eigen::Vector2d& k,
                                  const PotentialGrid& V);

// Free part only (V = 0) on an n x n grid; used when the potential varies but
// the lattice and k stay fixed.
SparseHermitian assemble_bloch_2d_free(const LatticeParams& p, const Eigen::Vector2d& k, int n);

// 1D operator -psi'' + V psi on [0, X) with Bloch boundary condition
// psi(x + X) = e^{ikX} psi(x); 3-point stencil, phase on the wrap entries.
SparseHermitian assemble_bloch_1d(double X, double k, const PotentialGrid& V);

enum class BoundaryCondition { Dirichlet, Neumann };

// Metric-weighted Laplacian -div(N grad u) on the unit square (no periodic
// wrap), Q1 elements on an n x n cell grid with lumped mass, so eigenvalues of
// the returned (real-valued, Hermitian) matrix approximate the continuous ones
// at O(h^2). Dirichlet eliminates boundary nodes; Neumann is the natural BC.
SparseHermitian assemble_laplacian_bc(int n, BoundaryCondition bc, const LatticeParams& p);

}  // namespace gapforge
