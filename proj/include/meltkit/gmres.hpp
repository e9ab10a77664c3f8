#pragma once

// Restarted right-preconditioned GMRES over matrix-free operators. The
// preconditioned basis is stored (flexible variant) so nested inner Krylov
// solves inside the preconditioner are safe.

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace meltkit {

using LinOp = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct GmresOptions {
  double rtol = 1e-4;
  double atol = 0.0;
  int restart = 100;
  int maxit = 500;
};

enum class GmresStatus { Converged, MaxIterations, Breakdown, NumericalFailure };

struct GmresResult {
  GmresStatus status = GmresStatus::MaxIterations;
  int iterations = 0;
  double final_residual = 0.0;               // ||b - A x||
  std::vector<double> residual_history;      // per-iteration residual norms

  bool converged() const { return status == GmresStatus::Converged; }
};

// Solves A x = b with right preconditioning (pass M = nullptr for none).
// x holds the initial guess on entry and the solution on exit.
GmresResult gmres(const LinOp& A, const Eigen::VectorXd& b, const LinOp* M,
                  Eigen::VectorXd& x, const GmresOptions& opt);

}  // namespace meltkit
