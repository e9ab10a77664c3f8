#pragma once

// Block Jacobian storage and the three-level recursive preconditioner:
//   M2: Schur-complement factorization of the velocity-pressure block,
//   M3 = M2* + M_T* - M_T* J3 M2*   (adds the temperature block),
//   M  = M3* + Mphi* - Mphi* J M3*  (adds the level-set block).
// Inner inverses are approximated with damped point-relaxation-preconditioned
// GMRES; the composition itself is exactly the recursive construction.

#include <array>

#include <Eigen/Sparse>

#include "meltkit/gmres.hpp"

namespace meltkit {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Field order: 0 = velocity, 1 = pressure, 2 = temperature, 3 = level set.
struct BlockMatrix {
  std::array<int, 4> dim{0, 0, 0, 0};
  SpMat block[4][4];  // (row-field, col-field)

  int offset(int f) const {
    int o = 0;
    for (int i = 0; i < f; ++i) o += dim[i];
    return o;
  }
  int total() const { return dim[0] + dim[1] + dim[2] + dim[3]; }

  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
  LinOp op() const;
};

struct PreconditionerConfig {
  double inner_rtol = 1e-2;   // block-inverse solves
  int inner_maxit = 50;
  double schur_rtol = 1e-1;   // momentum solves inside Schur applications
  int schur_maxit = 10;
  int relax_sweeps = 3;       // damped Jacobi sweeps (point relaxation)
  double relax_omega = 0.6;
};

// n damped-Jacobi sweeps approximating A^{-1} (stationary, hence a fixed
// linear operator).
LinOp point_relaxation(const SpMat& A, int sweeps, double omega);

// Approximate A^{-1} r by point-relaxation-preconditioned GMRES from zero.
LinOp approximate_inverse(const LinOp& A, int n, const LinOp& relax,
                          double rtol, int maxit);

// Velocity-pressure preconditioner (triple-product Schur form). Expects and
// returns vectors of length dim[0] + dim[1].
LinOp precond_M2(const BlockMatrix& J, const PreconditionerConfig& cfg);

// As above but with externally supplied block inverses (used by tests that
// pass exact inverses).
LinOp precond_M2_with(const BlockMatrix& J, const LinOp& Auu_inv,
                      const LinOp& S_inv);

// Adds the temperature block; vectors of length dim[0]+dim[1]+dim[2].
LinOp precond_M3(const BlockMatrix& J, const LinOp& M2, const LinOp& M_T);

// Full preconditioner over all four fields.
LinOp precond_M(const BlockMatrix& J, const LinOp& M3, const LinOp& M_phi);

// Convenience composition with point-relaxation inner preconditioners.
LinOp recursive_preconditioner(const BlockMatrix& J, const PreconditionerConfig& cfg);

}  // namespace meltkit
