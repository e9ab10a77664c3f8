#include "meltkit/precond.hpp"

namespace meltkit {

void BlockMatrix::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  y.setZero(total());
  for (int r = 0; r < 4; ++r) {
    if (dim[r] == 0) continue;
    auto yr = y.segment(offset(r), dim[r]);
    for (int c = 0; c < 4; ++c) {
      if (dim[c] == 0 || block[r][c].nonZeros() == 0) continue;
      yr.noalias() += block[r][c] * x.segment(offset(c), dim[c]);
    }
  }
}

LinOp BlockMatrix::op() const {
  return [this](const Eigen::VectorXd& x, Eigen::VectorXd& y) { apply(x, y); };
}

LinOp point_relaxation(const SpMat& A, int sweeps, double omega) {
  Eigen::VectorXd inv_diag(A.rows());
  for (int i = 0; i < A.rows(); ++i) {
    const double d = A.coeff(i, i);
    inv_diag[i] = (std::abs(d) > 1e-300) ? 1.0 / d : 0.0;
  }
  const SpMat* pA = &A;
  return [pA, inv_diag, sweeps, omega](const Eigen::VectorXd& r, Eigen::VectorXd& z) {
    z = omega * inv_diag.cwiseProduct(r);
    Eigen::VectorXd t(r.size());
    for (int s = 1; s < sweeps; ++s) {
      t.noalias() = (*pA) * z;
      z += omega * inv_diag.cwiseProduct(r - t);
    }
  };
}

LinOp approximate_inverse(const LinOp& A, int n, const LinOp& relax,
                          double rtol, int maxit) {
  GmresOptions opt;
  opt.rtol = rtol;
  opt.maxit = maxit;
  opt.restart = maxit;
  return [A, n, relax, opt](const Eigen::VectorXd& r, Eigen::VectorXd& z) {
    z = Eigen::VectorXd::Zero(n);
    gmres(A, r, &relax, z, opt);
  };
}

namespace {

LinOp sparse_op(const SpMat& A) {
  const SpMat* pA = &A;
  return [pA](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = (*pA) * x; };
}

// Diagonal estimate of the pressure Schur complement:
//   diag(Acp) - diag(Acu diag(Auu)^-1 Aup),
// used only to precondition the inner Schur solve.
Eigen::VectorXd schur_diag_estimate(const BlockMatrix& J) {
  const SpMat& Auu = J.block[0][0];
  const SpMat& Aup = J.block[0][1];
  const SpMat& Acu = J.block[1][0];
  const SpMat& Acp = J.block[1][1];
  const int np = J.dim[1];
  Eigen::VectorXd inv_duu(J.dim[0]);
  for (int i = 0; i < J.dim[0]; ++i) {
    const double d = Auu.coeff(i, i);
    inv_duu[i] = (std::abs(d) > 1e-300) ? 1.0 / d : 0.0;
  }
  Eigen::VectorXd d = Eigen::VectorXd::Zero(np);
  for (int i = 0; i < np; ++i) d[i] = Acp.coeff(i, i);
  // Row-wise walk of Acu paired with the matching Aup entries.
  Eigen::SparseMatrix<double> AupC = Aup;  // column-major view for fast column probing
  for (int i = 0; i < np; ++i) {
    for (SpMat::InnerIterator it(Acu, i); it; ++it) {
      const double aup = AupC.coeff(it.col(), i);
      if (aup != 0.0) d[i] -= it.value() * inv_duu[it.col()] * aup;
    }
  }
  for (int i = 0; i < np; ++i)
    if (std::abs(d[i]) < 1e-300) d[i] = 1.0;
  return d;
}

}  // namespace

LinOp precond_M2_with(const BlockMatrix& J, const LinOp& Auu_inv, const LinOp& S_inv) {
  const int nu = J.dim[0], np = J.dim[1];
  const SpMat* Aup = &J.block[0][1];
  const SpMat* Acu = &J.block[1][0];
  return [Auu_inv, S_inv, nu, np, Aup, Acu](const Eigen::VectorXd& r,
                                            Eigen::VectorXd& z) {
    z.resize(nu + np);
    Eigen::VectorXd ru = r.head(nu), rp = r.tail(np);
    // Lower factor: rp <- rp - Acu Auu^{-1} ru
    Eigen::VectorXd t(nu), su(nu), sp(np);
    Auu_inv(ru, t);
    if (Acu->nonZeros() > 0) rp.noalias() -= (*Acu) * t;
    // Diagonal factor
    su = t;  // Auu^{-1} ru reused
    S_inv(rp, sp);
    // Upper factor: su <- su - Auu^{-1} Aup sp
    if (Aup->nonZeros() > 0) {
      Eigen::VectorXd q(nu), q2(nu);
      q.noalias() = (*Aup) * sp;
      Auu_inv(q, q2);
      su -= q2;
    }
    z.head(nu) = su;
    z.tail(np) = sp;
  };
}

LinOp precond_M2(const BlockMatrix& J, const PreconditionerConfig& cfg) {
  const int nu = J.dim[0];
  const SpMat& Auu = J.block[0][0];
  const SpMat& Aup = J.block[0][1];
  const SpMat& Acu = J.block[1][0];
  const SpMat& Acp = J.block[1][1];

  LinOp uu_relax = point_relaxation(Auu, cfg.relax_sweeps, cfg.relax_omega);
  LinOp Auu_inv = approximate_inverse(sparse_op(Auu), nu, uu_relax,
                                      cfg.inner_rtol, cfg.inner_maxit);
  // Looser momentum inverse inside each Schur application.
  LinOp Auu_inv_loose = approximate_inverse(sparse_op(Auu), nu, uu_relax,
                                            cfg.schur_rtol, cfg.schur_maxit);

  // S v = Acp v - Acu Auu^{-1} Aup v, applied matrix-free.
  const SpMat* pAcp = &Acp;
  const SpMat* pAcu = &Acu;
  const SpMat* pAup = &Aup;
  LinOp S_op = [pAcp, pAcu, pAup, Auu_inv_loose, nu](const Eigen::VectorXd& v,
                                                     Eigen::VectorXd& y) {
    y.setZero(v.size());
    if (pAcp->nonZeros() > 0) y.noalias() = (*pAcp) * v;
    if (pAup->nonZeros() > 0 && pAcu->nonZeros() > 0) {
      Eigen::VectorXd q(nu), q2(nu);
      q.noalias() = (*pAup) * v;
      Auu_inv_loose(q, q2);
      y.noalias() -= (*pAcu) * q2;
    }
  };
  const Eigen::VectorXd sdiag = schur_diag_estimate(J);
  LinOp S_relax = [sdiag](const Eigen::VectorXd& r, Eigen::VectorXd& z) {
    z = r.cwiseQuotient(sdiag);
  };
  LinOp S_inv = approximate_inverse(S_op, J.dim[1], S_relax, cfg.inner_rtol,
                                    cfg.inner_maxit);
  return precond_M2_with(J, Auu_inv, S_inv);
}

LinOp precond_M3(const BlockMatrix& J, const LinOp& M2, const LinOp& M_T) {
  const int nu = J.dim[0], np = J.dim[1], nT = J.dim[2];
  const BlockMatrix* pJ = &J;
  return [pJ, M2, M_T, nu, np, nT](const Eigen::VectorXd& r, Eigen::VectorXd& z) {
    z.resize(nu + np + nT);
    Eigen::VectorXd a;
    M2(r.head(nu + np), a);
    // (J3 [a; 0])_T with the zero-padded embedding of M2.
    Eigen::VectorXd rT = r.tail(nT);
    if (pJ->block[2][0].nonZeros() > 0) rT.noalias() -= pJ->block[2][0] * a.head(nu);
    if (pJ->block[2][1].nonZeros() > 0) rT.noalias() -= pJ->block[2][1] * a.tail(np);
    Eigen::VectorXd zT;
    M_T(rT, zT);
    z.head(nu + np) = a;
    z.tail(nT) = zT;
  };
}

LinOp precond_M(const BlockMatrix& J, const LinOp& M3, const LinOp& M_phi) {
  const int nupT = J.dim[0] + J.dim[1] + J.dim[2];
  const int nphi = J.dim[3];
  const int nu = J.dim[0], np = J.dim[1], nT = J.dim[2];
  const BlockMatrix* pJ = &J;
  return [pJ, M3, M_phi, nupT, nphi, nu, np, nT](const Eigen::VectorXd& r,
                                                 Eigen::VectorXd& z) {
    z.resize(nupT + nphi);
    Eigen::VectorXd a;
    M3(r.head(nupT), a);
    Eigen::VectorXd rphi = r.tail(nphi);
    if (pJ->block[3][0].nonZeros() > 0) rphi.noalias() -= pJ->block[3][0] * a.head(nu);
    if (pJ->block[3][1].nonZeros() > 0) rphi.noalias() -= pJ->block[3][1] * a.segment(nu, np);
    if (pJ->block[3][2].nonZeros() > 0) rphi.noalias() -= pJ->block[3][2] * a.tail(nT);
    Eigen::VectorXd zphi;
    M_phi(rphi, zphi);
    z.head(nupT) = a;
    z.tail(nphi) = zphi;
  };
}

LinOp recursive_preconditioner(const BlockMatrix& J, const PreconditionerConfig& cfg) {
  LinOp M2 = precond_M2(J, cfg);
  LinOp T_relax = point_relaxation(J.block[2][2], cfg.relax_sweeps, cfg.relax_omega);
  LinOp M_T = approximate_inverse(sparse_op(J.block[2][2]), J.dim[2], T_relax,
                                  cfg.inner_rtol, cfg.inner_maxit);
  LinOp M3 = precond_M3(J, M2, M_T);
  LinOp phi_relax = point_relaxation(J.block[3][3], cfg.relax_sweeps, cfg.relax_omega);
  LinOp M_phi = approximate_inverse(sparse_op(J.block[3][3]), J.dim[3], phi_relax,
                                    cfg.inner_rtol, cfg.inner_maxit);
  return precond_M(J, M3, M_phi);
}

}  // namespace meltkit
