#pragma once

// Generalized-alpha time integration for first-order systems with the
// Newmark value/rate link and a two-stage predictor/multicorrector Newton
// loop. The linear solve is delegated to the system.

#include <Eigen/Dense>

namespace meltkit {

struct AlphaParams {
  double rho_inf = 0.5;  // spectral radius at the high-frequency limit

  double alpha_m() const { return 0.5 * (3.0 - rho_inf) / (1.0 + rho_inf); }
  double alpha_f() const { return 1.0 / (1.0 + rho_inf); }
  double gamma() const { return 0.5 + alpha_m() - alpha_f(); }
};

// X_{n+1} = X_n + dt [(1-gamma) Xdot_n + gamma Xdot_{n+1}]
Eigen::VectorXd newmark_update(const Eigen::VectorXd& X_n,
                               const Eigen::VectorXd& Xdot_n,
                               const Eigen::VectorXd& Xdot_np1, double dt,
                               double gamma);

struct Predictor {
  Eigen::VectorXd Xdot;  // ((gamma-1)/gamma) Xdot_n
  Eigen::VectorXd X;     // X_n
  Eigen::VectorXd P;     // P_n
};
Predictor predict(const Eigen::VectorXd& X_n, const Eigen::VectorXd& Xdot_n,
                  const Eigen::VectorXd& P_n, double gamma);

// Interface the stepped system implements. `solve_linear` solves
// J [dXdot; dP] = -R with J = c_rate dR/dXdot + c_val dR/dX (+ dR/dP) at the
// supplied intermediate state and reports the Krylov iteration count.
class ImplicitSystem {
 public:
  virtual ~ImplicitSystem() = default;
  virtual int n_X() const = 0;
  virtual int n_P() const = 0;
  virtual void residual(const Eigen::VectorXd& Xdot_int, const Eigen::VectorXd& X_int,
                        const Eigen::VectorXd& P, Eigen::VectorXd& R) = 0;
  virtual int solve_linear(const Eigen::VectorXd& Xdot_int, const Eigen::VectorXd& X_int,
                           const Eigen::VectorXd& P, const Eigen::VectorXd& R,
                           double c_rate, double c_val, Eigen::VectorXd& dXdot,
                           Eigen::VectorXd& dP) = 0;
};

struct NewtonConfig {
  double rtol = 1e-3;
  double atol = 1e-10;
  int max_newton = 8;
};

struct StepStats {
  bool converged = false;
  int newton_iters = 0;
  int gmres_iters = 0;
  double r0 = 0.0;
  double r_final = 0.0;
};

// One generalized-alpha step; X, Xdot, P advance from t_n to t_{n+1} in
// place. On non-convergence the inputs are restored and converged = false
// (the caller may halve dt and retry).
StepStats generalized_alpha_step(ImplicitSystem& sys, const AlphaParams& alpha,
                                 double dt, const NewtonConfig& cfg,
                                 Eigen::VectorXd& X, Eigen::VectorXd& Xdot,
                                 Eigen::VectorXd& P);

}  // namespace meltkit
