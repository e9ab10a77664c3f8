#include "meltkit/gmres.hpp"

#include <cmath>

namespace meltkit {

GmresResult gmres(const LinOp& A, const Eigen::VectorXd& b, const LinOp* M,
                  Eigen::VectorXd& x, const GmresOptions& opt) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  GmresResult res;
  const int n = static_cast<int>(b.size());
  if (x.size() != n) x = VectorXd::Zero(n);

  const double bnorm = b.norm();
  const double tol = std::max(opt.rtol * bnorm, opt.atol);
  const int m = std::max(1, opt.restart);

  VectorXd r(n), w(n), z(n);
  MatrixXd V(n, m + 1), Z(n, m);
  MatrixXd H = MatrixXd::Zero(m + 1, m);
  VectorXd cs(m), sn(m), g(m + 1);

  int total_it = 0;
  while (true) {
    A(x, w);
    r = b - w;
    double beta = r.norm();
    if (!std::isfinite(beta)) {
      res.status = GmresStatus::NumericalFailure;
      res.final_residual = beta;
      return res;
    }
    if (res.residual_history.empty()) res.residual_history.push_back(beta);
    if (beta <= tol) {
      res.status = GmresStatus::Converged;
      res.iterations = total_it;
      res.final_residual = beta;
      return res;
    }
    if (total_it >= opt.maxit) {
      res.status = GmresStatus::MaxIterations;
      res.iterations = total_it;
      res.final_residual = beta;
      return res;
    }

    V.col(0) = r / beta;
    g.setZero();
    g[0] = beta;
    int j = 0;
    bool breakdown = false;
    for (; j < m && total_it < opt.maxit; ++j, ++total_it) {
      if (M)
        (*M)(V.col(j), z);
      else
        z = V.col(j);
      Z.col(j) = z;
      A(z, w);
      // Modified Gram-Schmidt
      for (int i = 0; i <= j; ++i) {
        H(i, j) = w.dot(V.col(i));
        w -= H(i, j) * V.col(i);
      }
      H(j + 1, j) = w.norm();
      if (!std::isfinite(H(j + 1, j))) {
        res.status = GmresStatus::NumericalFailure;
        res.iterations = total_it;
        res.final_residual = std::abs(g[j]);
        return res;
      }
      const bool happy = H(j + 1, j) <= 1e-14 * std::max(1.0, beta);
      if (!happy) V.col(j + 1) = w / H(j + 1, j);

      // Apply accumulated Givens rotations, then form the new one.
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double denom = std::hypot(H(j, j), H(j + 1, j));
      cs[j] = (denom == 0.0) ? 1.0 : H(j, j) / denom;
      sn[j] = (denom == 0.0) ? 0.0 : H(j + 1, j) / denom;
      H(j, j) = denom;
      H(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];

      res.residual_history.push_back(std::abs(g[j + 1]));
      if (std::abs(g[j + 1]) <= tol || happy) {
        ++j;
        ++total_it;
        breakdown = happy;
        break;
      }
    }

    // Back-substitute y and update x with the stored preconditioned basis.
    Eigen::VectorXd y(j);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < j; ++k) s -= H(i, k) * y[k];
      y[i] = (H(i, i) != 0.0) ? s / H(i, i) : 0.0;
    }
    for (int i = 0; i < j; ++i) x += y[i] * Z.col(i);

    A(x, w);
    const double true_res = (b - w).norm();
    if (true_res <= tol || breakdown) {
      res.status = GmresStatus::Converged;
      res.iterations = total_it;
      res.final_residual = true_res;
      return res;
    }
    if (total_it >= opt.maxit) {
      res.status = GmresStatus::MaxIterations;
      res.iterations = total_it;
      res.final_residual = true_res;
      return res;
    }
    // else: restart cycle
  }
}

}  // namespace meltkit
