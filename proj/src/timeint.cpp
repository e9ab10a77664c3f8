#include "meltkit/timeint.hpp"

#include <cmath>

namespace meltkit {

Eigen::VectorXd newmark_update(const Eigen::VectorXd& X_n,
                               const Eigen::VectorXd& Xdot_n,
                               const Eigen::VectorXd& Xdot_np1, double dt,
                               double gamma) {
  return X_n + dt * ((1.0 - gamma) * Xdot_n + gamma * Xdot_np1);
}

Predictor predict(const Eigen::VectorXd& X_n, const Eigen::VectorXd& Xdot_n,
                  const Eigen::VectorXd& P_n, double gamma) {
  Predictor p;
  p.Xdot = (gamma - 1.0) / gamma * Xdot_n;
  p.X = X_n;
  p.P = P_n;
  return p;
}

StepStats generalized_alpha_step(ImplicitSystem& sys, const AlphaParams& alpha,
                                 double dt, const NewtonConfig& cfg,
                                 Eigen::VectorXd& X, Eigen::VectorXd& Xdot,
                                 Eigen::VectorXd& P) {
  const double am = alpha.alpha_m();
  const double af = alpha.alpha_f();
  const double g = alpha.gamma();

  StepStats stats;
  const Eigen::VectorXd X_n = X, Xdot_n = Xdot, P_n = P;

  Predictor pred = predict(X_n, Xdot_n, P_n, g);
  Eigen::VectorXd Xdot_new = pred.Xdot;
  Eigen::VectorXd X_new = pred.X;
  Eigen::VectorXd P_new = pred.P;

  Eigen::VectorXd R, Xdot_int, X_int, dXdot, dP;
  for (int l = 0; l <= cfg.max_newton; ++l) {
    Xdot_int = am * Xdot_new + (1.0 - am) * Xdot_n;
    X_int = af * X_new + (1.0 - af) * X_n;
    sys.residual(Xdot_int, X_int, P_new, R);
    const double nrm = R.norm();
    if (l == 0) stats.r0 = nrm;
    stats.r_final = nrm;
    if (nrm <= std::max(cfg.rtol * stats.r0, cfg.atol)) {
      stats.converged = true;
      break;
    }
    if (l == cfg.max_newton) break;

    stats.gmres_iters += sys.solve_linear(Xdot_int, X_int, P_new, R, am,
                                          af * g * dt, dXdot, dP);
    stats.newton_iters++;
    Xdot_new += dXdot;
    X_new += g * dt * dXdot;
    if (P_new.size() > 0) P_new += dP;
  }

  if (stats.converged) {
    X = X_new;
    Xdot = Xdot_new;
    P = P_new;
  }
  return stats;
}

}  // namespace meltkit
