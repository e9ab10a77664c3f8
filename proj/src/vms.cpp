#include "meltkit/vms.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace meltkit {

StabilizationParams stabilization_params(double h, double dt, const Vec3& u,
                                         double rho, double mu, double kappa,
                                         double cp) {
  StabilizationParams tau;
  const double u2 = u.squaredNorm();
  const double h2 = h * h;
  const double adv = 4.0 * u2 / h2;
  const double trans = 4.0 / (dt * dt);
  tau.tau_M = 1.0 / std::sqrt(trans + adv + 16.0 * mu * mu / (rho * rho * h2 * h2));
  tau.tau_C = h2 / (3.0 * tau.tau_M);
  const double diff = kappa / (rho * cp);
  tau.tau_T = 1.0 / std::sqrt(trans + adv + 16.0 * diff * diff / (h2 * h2));
  tau.tau_phi = 1.0 / std::sqrt(trans + adv);
  return tau;
}

FineScale fine_scale(const Vec3& r_M, double r_C, double r_T, double r_phi,
                     const StabilizationParams& tau, double rho) {
  FineScale f;
  f.u_prime = -tau.tau_M * r_M;
  f.p_prime = -tau.tau_C * rho * r_C;
  f.T_prime = -tau.tau_T * r_T;
  f.phi_prime = -tau.tau_phi * r_phi;
  return f;
}

namespace {

// 4-point rule (degree 2) in barycentric coordinates, weights V/4.
constexpr double kQa = 0.5854101966249685;
constexpr double kQb = 0.13819660112501052;
constexpr double kQuad4[4][4] = {{kQa, kQb, kQb, kQb},
                                 {kQb, kQa, kQb, kQb},
                                 {kQb, kQb, kQa, kQb},
                                 {kQb, kQb, kQb, kQa}};
constexpr double kQuad1[1][4] = {{0.25, 0.25, 0.25, 0.25}};

// Everything the weak form needs at one quadrature point.
struct PointEval {
  Vec3 x = Vec3::Zero();
  Vec3 u = Vec3::Zero(), u_dot = Vec3::Zero();
  double p = 0, T = 0, phi = 0, T_dot = 0, phi_dot = 0;
  Eigen::Matrix3d grad_u = Eigen::Matrix3d::Zero();
  double div_u = 0;
  Vec3 grad_p = Vec3::Zero(), grad_T = Vec3::Zero(), grad_phi = Vec3::Zero();
  double fl = 0, flp = 0;
  double rho = 0, mu = 0, cp = 0, kap = 0;
  Vec3 grad_rho = Vec3::Zero(), grad_mu = Vec3::Zero(), grad_kap = Vec3::Zero();
  double delta = 0;
  double dil = 0;  // evaporation-induced dilatation m_e n . grad(1/rho)
  Vec3 f_tot = Vec3::Zero();  // f_sf + external forcing
  double Q_tot = 0;           // Q_sf + DED flux + external heating
  // strong residuals (fine-scale pass only)
  Vec3 r_M = Vec3::Zero();
  double r_C = 0, r_T = 0, r_phi = 0;
};

double poly_deriv(const std::vector<double>& c, double T) {
  double v = 0.0;
  for (size_t k = c.size(); k-- > 1;) v = v * T + c[k] * static_cast<double>(k);
  return v;
}

}  // namespace

struct VmsAssembler::LocalState {
  Vec3 x[4];
  Vec3 u[4], u_dot[4];
  double p[4], T[4], phi[4], T_dot[4], phi_dot[4];
  double kappa[4], I_s[4];
  Vec3 f_ext[4];
  double q_ext[4];
};

VmsAssembler::VmsAssembler(const Mesh& mesh, const VmsModel& model)
    : mesh_(&mesh), model_(&model) {}

std::array<int, 4> VmsAssembler::block_dims() const {
  const int N = mesh_->num_nodes();
  const auto& a = model_->active;
  return {a.flow ? 3 * N : 0, a.flow ? N : 0, a.temperature ? N : 0,
          a.levelset ? N : 0};
}

int VmsAssembler::residual_size() const {
  const auto d = block_dims();
  return d[0] + d[1] + d[2] + d[3];
}

void VmsAssembler::gather(int e, const FieldViews& f, LocalState& ls) const {
  const auto& el = mesh_->elements[e];
  for (int a = 0; a < 4; ++a) {
    const int n = el[a];
    ls.x[a] = mesh_->nodes[n];
    ls.u[a] = f.u->segment<3>(3 * n);
    ls.u_dot[a] = f.u_dot->segment<3>(3 * n);
    ls.p[a] = (*f.p)[n];
    ls.T[a] = (*f.T)[n];
    ls.phi[a] = (*f.phi)[n];
    ls.T_dot[a] = (*f.T_dot)[n];
    ls.phi_dot[a] = (*f.phi_dot)[n];
  }
}

void VmsAssembler::element_residual(int e, const LocalState& ls,
                                    const LaggedFields& lag, double* r) const {
  const VmsModel& m = *model_;
  const auto& G = mesh_->grad_N[e];
  const double V = mesh_->volume[e];
  const double h = mesh_->h_min[e];
  const double eps = m.c_eps * h;
  for (int k = 0; k < 24; ++k) r[k] = 0.0;

  auto eval = [&](const double* Nq, bool fine) {
    PointEval q;
    for (int a = 0; a < 4; ++a) {
      q.x += Nq[a] * ls.x[a];
      q.u += Nq[a] * ls.u[a];
      q.u_dot += Nq[a] * ls.u_dot[a];
      q.p += Nq[a] * ls.p[a];
      q.T += Nq[a] * ls.T[a];
      q.phi += Nq[a] * ls.phi[a];
      q.T_dot += Nq[a] * ls.T_dot[a];
      q.phi_dot += Nq[a] * ls.phi_dot[a];
      q.grad_u += ls.u[a] * G[a].transpose();
      q.grad_p += ls.p[a] * G[a];
      q.grad_T += ls.T[a] * G[a];
      q.grad_phi += ls.phi[a] * G[a];
    }
    q.div_u = q.grad_u.trace();

    q.fl = liquid_fraction(q.T, m.T_s, m.T_l);
    q.flp = liquid_fraction_deriv(q.T, m.T_s, m.T_l);
    const double H = heaviside(q.phi, eps);
    const double Hp = heaviside_deriv(q.phi, eps);
    const auto& pr = m.props;
    const double ks = pr.solid_k(q.T), cps = pr.solid_cp(q.T);
    q.rho = H * ((1 - q.fl) * pr.rho_s + q.fl * pr.rho_l) + (1 - H) * pr.rho_g;
    q.mu = H * ((1 - q.fl) * pr.mu_s + q.fl * pr.mu_l) + (1 - H) * pr.mu_g;
    q.cp = H * ((1 - q.fl) * cps + q.fl * pr.cp_l) + (1 - H) * pr.cp_g;
    q.kap = H * ((1 - q.fl) * ks + q.fl * pr.k_l) + (1 - H) * pr.k_g;

    const double drho_dphi = Hp * ((1 - q.fl) * pr.rho_s + q.fl * pr.rho_l - pr.rho_g);
    const double drho_dT = H * (pr.rho_l - pr.rho_s) * q.flp;
    q.grad_rho = drho_dphi * q.grad_phi + drho_dT * q.grad_T;
    const double dmu_dphi = Hp * ((1 - q.fl) * pr.mu_s + q.fl * pr.mu_l - pr.mu_g);
    const double dmu_dT = H * (pr.mu_l - pr.mu_s) * q.flp;
    q.grad_mu = dmu_dphi * q.grad_phi + dmu_dT * q.grad_T;
    const double ksp = pr.k_s_poly.empty() ? 0.0 : poly_deriv(pr.k_s_poly, q.T);
    const double dkap_dphi = Hp * ((1 - q.fl) * ks + q.fl * pr.k_l - pr.k_g);
    const double dkap_dT = H * ((1 - q.fl) * ksp + (pr.k_l - ks) * q.flp);
    q.grad_kap = dkap_dphi * q.grad_phi + dkap_dT * q.grad_T;

    q.delta = m.interface_forces ? dirac_scaled(q.phi, eps, q.rho, m.blend) : 0.0;

    double kappa_bar = 0.0, I_s = 0.0;
    if (lag.kappa_bar)
      for (int a = 0; a < 4; ++a) kappa_bar += Nq[a] * ls.kappa[a];
    if (lag.I_s)
      for (int a = 0; a < 4; ++a) I_s += Nq[a] * ls.I_s[a];

    if (m.interface_forces) {
      InterfacePointState s;
      s.T = q.T;
      s.grad_T = q.grad_T;
      s.phi = q.phi;
      s.grad_phi = q.grad_phi;
      s.kappa_bar = kappa_bar;
      s.rho = q.rho;
      s.grad_rho = q.grad_rho;
      s.eps = eps;
      q.f_tot = interfacial_force(s, m.blend, m.surface, m.evap, m.tol_grad);
      q.Q_tot = heat_source_terms(q.T, q.delta, I_s, m.heat, m.evap);
      if (lag.ded_mode && q.delta != 0.0) {
        const auto n = interface_normal(q.grad_phi, m.tol_grad);
        if (n)
          q.Q_tot += ded_surface_flux(q.x, lag.ded_center, *n, q.delta,
                                      lag.ded_Qv, lag.ded);
      }
      if (m.evap) {
        const auto n = interface_normal(q.grad_phi, m.tol_grad);
        if (n) {
          const double me = evaporation_flux(q.T, *m.evap);
          q.dil = me * n->dot(-q.grad_rho / (q.rho * q.rho));
        }
      }
    }
    if (lag.f_ext)
      for (int a = 0; a < 4; ++a) q.f_tot += Nq[a] * ls.f_ext[a];
    if (lag.q_ext)
      for (int a = 0; a < 4; ++a) q.Q_tot += Nq[a] * ls.q_ext[a];

    if (fine) {
      const Vec3 conv = q.grad_u * q.u + q.u * q.div_u;
      const Vec3 visc = 2.0 * (0.5 * (q.grad_u + q.grad_u.transpose())) * q.grad_mu;
      q.r_M = q.rho * (q.u_dot + conv - m.gravity) + q.grad_p - visc - q.f_tot;
      q.r_C = q.div_u - q.dil;
      q.r_T = q.rho * (q.cp + m.L_m * q.flp) * (q.T_dot + q.u.dot(q.grad_T)) -
              q.grad_kap.dot(q.grad_T) - q.Q_tot;
      q.r_phi = q.phi_dot + q.u.dot(q.grad_phi);
    }
    return q;
  };

  const auto& act = m.active;

  // Galerkin terms, 4-point rule.
  for (int iq = 0; iq < 4; ++iq) {
    const double* Nq = kQuad4[iq];
    const double w = V / 4.0;
    const PointEval q = eval(Nq, false);
    const Vec3 conv = q.grad_u * q.u + q.u * q.div_u;
    const Eigen::Matrix3d tau_v = q.mu * (q.grad_u + q.grad_u.transpose());
    for (int a = 0; a < 4; ++a) {
      if (act.flow) {
        const Vec3 visc_a = tau_v * G[a];
        for (int i = 0; i < 3; ++i)
          r[3 * a + i] += w * (Nq[a] * q.rho * (q.u_dot[i] + conv[i] - m.gravity[i]) +
                               visc_a[i] - G[a][i] * q.p - Nq[a] * q.f_tot[i]);
        r[12 + a] += w * Nq[a] * (q.div_u - q.dil);
      }
      if (act.temperature) {
        const double adv = q.T_dot + q.u.dot(q.grad_T);
        r[16 + a] += w * (Nq[a] * q.rho * (q.cp + m.L_m * q.flp) * adv +
                          q.kap * G[a].dot(q.grad_T) - Nq[a] * q.Q_tot);
      }
      if (act.levelset)
        r[20 + a] += w * Nq[a] * (q.phi_dot + q.u.dot(q.grad_phi));
    }
  }

  // Fine-scale terms.
  const int nfq = m.full_fine_scale_quadrature ? 4 : 1;
  for (int iq = 0; iq < nfq; ++iq) {
    const double* Nq = m.full_fine_scale_quadrature ? kQuad4[iq] : kQuad1[0];
    const double w = m.full_fine_scale_quadrature ? V / 4.0 : V;
    const PointEval q = eval(Nq, true);
    const StabilizationParams tau =
        stabilization_params(h, m.dt, q.u, q.rho, q.mu, q.kap, q.cp);
    const FineScale fs = fine_scale(q.r_M, q.r_C, q.r_T, q.r_phi, tau, q.rho);
    for (int a = 0; a < 4; ++a) {
      const double ua = q.u.dot(G[a]);
      if (act.flow) {
        const Vec3 cross = q.grad_u * fs.u_prime;
        const double gu = G[a].dot(fs.u_prime);
        for (int i = 0; i < 3; ++i)
          r[3 * a + i] += w * (-ua * fs.u_prime[i] - fs.p_prime * G[a][i] +
                               Nq[a] * cross[i] - fs.u_prime[i] * gu / q.rho);
        r[12 + a] += w * (-gu / q.rho);
      }
      if (act.temperature) r[16 + a] += w * (-ua * fs.T_prime);
      if (act.levelset) r[20 + a] += w * (-ua * fs.phi_prime);
    }
  }
}

void VmsAssembler::analytic_element_jacobian(int e, const LocalState& ls,
                                             const LaggedFields& lag, double c_rate,
                                             double c_val, double K[24][24]) const {
  // Exact Galerkin linearization with frozen material-property derivatives;
  // fine-scale terms keep tau frozen and drop the quadratic u' terms
  // (inconsistent tangent). Interface forces and sources stay explicit.
  const VmsModel& m = *model_;
  const auto& G = mesh_->grad_N[e];
  const double V = mesh_->volume[e];
  const double h = mesh_->h_min[e];
  const auto& act = m.active;

  // Reuse the residual point evaluation via a local copy of the machinery.
  auto interp = [&](const double* Nq) {
    PointEval q;
    for (int a = 0; a < 4; ++a) {
      q.u += Nq[a] * ls.u[a];
      q.T += Nq[a] * ls.T[a];
      q.phi += Nq[a] * ls.phi[a];
      q.grad_u += ls.u[a] * G[a].transpose();
      q.grad_T += ls.T[a] * G[a];
      q.grad_phi += ls.phi[a] * G[a];
    }
    q.div_u = q.grad_u.trace();
    q.fl = liquid_fraction(q.T, m.T_s, m.T_l);
    q.flp = liquid_fraction_deriv(q.T, m.T_s, m.T_l);
    const double eps = m.c_eps * h;
    const double H = heaviside(q.phi, eps);
    const auto& pr = m.props;
    const double ks = pr.solid_k(q.T), cps = pr.solid_cp(q.T);
    q.rho = H * ((1 - q.fl) * pr.rho_s + q.fl * pr.rho_l) + (1 - H) * pr.rho_g;
    q.mu = H * ((1 - q.fl) * pr.mu_s + q.fl * pr.mu_l) + (1 - H) * pr.mu_g;
    q.cp = H * ((1 - q.fl) * cps + q.fl * pr.cp_l) + (1 - H) * pr.cp_g;
    q.kap = H * ((1 - q.fl) * ks + q.fl * pr.k_l) + (1 - H) * pr.k_g;
    const double Hp = heaviside_deriv(q.phi, eps);
    const double ksp = pr.k_s_poly.empty() ? 0.0 : poly_deriv(pr.k_s_poly, q.T);
    const double dkap_dphi = Hp * ((1 - q.fl) * ks + q.fl * pr.k_l - pr.k_g);
    const double dkap_dT = H * ((1 - q.fl) * ksp + (pr.k_l - ks) * q.flp);
    q.grad_kap = dkap_dphi * q.grad_phi + dkap_dT * q.grad_T;
    return q;
  };

  auto conv_deriv = [&](const PointEval& q, int b, int i, int j, const double* Nq) {
    // d[(u.grad)u + u div u]_i / d u_{b,j}
    double v = 0.0;
    if (i == j) v += q.u.dot(G[b]) + Nq[b] * q.div_u;
    v += Nq[b] * q.grad_u(i, j) + q.u[i] * G[b][j];
    return v;
  };

  // Galerkin pass.
  for (int iq = 0; iq < 4; ++iq) {
    const double* Nq = kQuad4[iq];
    const double w = V / 4.0;
    const PointEval q = interp(Nq);
    const double cpe = q.rho * (q.cp + m.L_m * q.flp);
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        if (act.flow) {
          for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
              double v = Nq[a] * q.rho *
                         (c_rate * Nq[b] * (i == j) + c_val * conv_deriv(q, b, i, j, Nq));
              v += c_val * q.mu * ((i == j) * G[a].dot(G[b]) + G[b][i] * G[a][j]);
              K[3 * a + i][3 * b + j] += w * v;
            }
            K[3 * a + i][12 + b] += w * (-G[a][i] * Nq[b]);
            K[12 + a][3 * b + i] += w * (Nq[a] * c_val * G[b][i]);
          }
        }
        if (act.temperature) {
          K[16 + a][16 + b] += w * (Nq[a] * cpe * (c_rate * Nq[b] + c_val * q.u.dot(G[b])) +
                                    c_val * q.kap * G[a].dot(G[b]));
          if (act.flow)
            for (int j = 0; j < 3; ++j)
              K[16 + a][3 * b + j] += w * Nq[a] * cpe * c_val * Nq[b] * q.grad_T[j];
        }
        if (act.levelset) {
          K[20 + a][20 + b] += w * Nq[a] * (c_rate * Nq[b] + c_val * q.u.dot(G[b]));
          if (act.flow)
            for (int j = 0; j < 3; ++j)
              K[20 + a][3 * b + j] += w * Nq[a] * c_val * Nq[b] * q.grad_phi[j];
        }
      }
    }
  }

  // Fine-scale pass (frozen tau).
  const int nfq = m.full_fine_scale_quadrature ? 4 : 1;
  for (int iq = 0; iq < nfq; ++iq) {
    const double* Nq = m.full_fine_scale_quadrature ? kQuad4[iq] : kQuad1[0];
    const double w = m.full_fine_scale_quadrature ? V / 4.0 : V;
    const PointEval q = interp(Nq);
    const StabilizationParams tau =
        stabilization_params(h, m.dt, q.u, q.rho, q.mu, q.kap, q.cp);
    const double cpe = q.rho * (q.cp + m.L_m * q.flp);
    for (int a = 0; a < 4; ++a) {
      const double ua = q.u.dot(G[a]);
      for (int b = 0; b < 4; ++b) {
        if (act.flow) {
          for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
              const double drm = q.rho * (c_rate * Nq[b] * (i == j) +
                                          c_val * conv_deriv(q, b, i, j, Nq));
              // SUPG momentum + grad-div
              K[3 * a + i][3 * b + j] +=
                  w * (tau.tau_M * ua * drm +
                       tau.tau_C * q.rho * c_val * G[a][i] * G[b][j]);
              // PSPG continuity (sums over i)
              K[12 + a][3 * b + j] += w * tau.tau_M / q.rho * G[a][i] * drm;
            }
            K[3 * a + i][12 + b] += w * tau.tau_M * ua * G[b][i];
          }
          K[12 + a][12 + b] += w * tau.tau_M / q.rho * G[a].dot(G[b]);
        }
        if (act.temperature)
          K[16 + a][16 + b] +=
              w * tau.tau_T * ua *
              (cpe * (c_rate * Nq[b] + c_val * q.u.dot(G[b])) - c_val * q.grad_kap.dot(G[b]));
        if (act.levelset)
          K[20 + a][20 + b] +=
              w * tau.tau_phi * ua * (c_rate * Nq[b] + c_val * q.u.dot(G[b]));
      }
    }
  }
}

namespace {

struct DofMap {
  // local column/row -> (field, block-local index); field < 0 when inactive
  struct Entry {
    int field = -1;
    int index = 0;
  };
  std::array<Entry, 24> map;
};

DofMap make_dof_map(const std::array<int, 4>& el, const ActiveFields& act) {
  DofMap dm;
  for (int a = 0; a < 4; ++a) {
    for (int i = 0; i < 3; ++i)
      dm.map[3 * a + i] = {act.flow ? 0 : -1, 3 * el[a] + i};
    dm.map[12 + a] = {act.flow ? 1 : -1, el[a]};
    dm.map[16 + a] = {act.temperature ? 2 : -1, el[a]};
    dm.map[20 + a] = {act.levelset ? 3 : -1, el[a]};
  }
  return dm;
}

bool row_constrained(const BcMask* bc, int field, int index) {
  if (!bc) return false;
  switch (field) {
    case 0: return bc->u[index] != 0;
    case 1: return index == bc->pinned_pressure_node;
    case 2: return bc->T[index] != 0;
    case 3: return bc->phi[index] != 0;
  }
  return false;
}

}  // namespace

void VmsAssembler::assemble_residual(const FieldViews& f, const LaggedFields& lag,
                                     const BcMask* bc, Eigen::VectorXd& R) const {
  const auto dims = block_dims();
  const int total = dims[0] + dims[1] + dims[2] + dims[3];
  R.setZero(total);
  std::array<int, 4> off{};
  for (int i = 1; i < 4; ++i) off[i] = off[i - 1] + dims[i - 1];

  const int ne = mesh_->num_elements();
  int nthreads = 1;
#ifdef _OPENMP
  nthreads = omp_get_max_threads();
#endif
  std::vector<Eigen::VectorXd> partial(nthreads, Eigen::VectorXd::Zero(total));

#pragma omp parallel
  {
    int tid = 0;
#ifdef _OPENMP
    tid = omp_get_thread_num();
#endif
    Eigen::VectorXd& Rt = partial[tid];
    LocalState ls;
    double r[24];
#pragma omp for schedule(static)
    for (int e = 0; e < ne; ++e) {
      gather(e, f, ls);
      const auto& el = mesh_->elements[e];
      for (int a = 0; a < 4; ++a) {
        ls.kappa[a] = lag.kappa_bar ? lag.kappa_bar->values[el[a]] : 0.0;
        ls.I_s[a] = lag.I_s ? lag.I_s->values[el[a]] : 0.0;
        ls.f_ext[a] = lag.f_ext ? Vec3(lag.f_ext->values.segment<3>(3 * el[a])) : Vec3::Zero();
        ls.q_ext[a] = lag.q_ext ? lag.q_ext->values[el[a]] : 0.0;
      }
      element_residual(e, ls, lag, r);
      const DofMap dm = make_dof_map(el, model_->active);
      for (int k = 0; k < 24; ++k) {
        const auto& ent = dm.map[k];
        if (ent.field < 0) continue;
        if (row_constrained(bc, ent.field, ent.index)) continue;
        Rt[off[ent.field] + ent.index] += r[k];
      }
    }
  }
  for (int t = 0; t < nthreads; ++t) R += partial[t];

  for (int i = 0; i < total; ++i) {
    if (!std::isfinite(R[i])) {
      int fblock = 3;
      for (int fidx = 0; fidx < 4; ++fidx)
        if (i < off[fidx] + dims[fidx]) {
          fblock = fidx;
          break;
        }
      static const char* names[4] = {"momentum", "continuity", "temperature",
                                     "levelset"};
      const int local = i - off[fblock];
      const int node = (fblock == 0) ? local / 3 : local;
      throw std::runtime_error("non-finite residual in " + std::string(names[fblock]) +
                               " block at node " + std::to_string(node));
    }
  }
}

void VmsAssembler::assemble_jacobian(const FieldViews& f, const LaggedFields& lag,
                                     const BcMask* bc, double c_rate, double c_val,
                                     JacobianMode mode, BlockMatrix& J) const {
  const auto dims = block_dims();
  J.dim = dims;
  const auto& act = model_->active;
  const int ne = mesh_->num_elements();

  using Trip = Eigen::Triplet<double>;
  int nthreads = 1;
#ifdef _OPENMP
  nthreads = omp_get_max_threads();
#endif
  // 16 block triplet lists per thread, merged in thread order (deterministic
  // with a static schedule).
  std::vector<std::array<std::vector<Trip>, 16>> tls(nthreads);

#pragma omp parallel
  {
    int tid = 0;
#ifdef _OPENMP
    tid = omp_get_thread_num();
#endif
    auto& trip = tls[tid];
    LocalState ls;
    double K[24][24];
    double r0[24], rp[24], rm[24];
#pragma omp for schedule(static)
    for (int e = 0; e < ne; ++e) {
      gather(e, f, ls);
      const auto& el = mesh_->elements[e];
      for (int a = 0; a < 4; ++a) {
        ls.kappa[a] = lag.kappa_bar ? lag.kappa_bar->values[el[a]] : 0.0;
        ls.I_s[a] = lag.I_s ? lag.I_s->values[el[a]] : 0.0;
        ls.f_ext[a] = lag.f_ext ? Vec3(lag.f_ext->values.segment<3>(3 * el[a])) : Vec3::Zero();
        ls.q_ext[a] = lag.q_ext ? lag.q_ext->values[el[a]] : 0.0;
      }
      for (auto& row : K)
        for (double& v : row) v = 0.0;

      if (mode == JacobianMode::FiniteDifference) {
        element_residual(e, ls, lag, r0);
        LocalState pert = ls;
        auto column = [&](int col, double* target_rate3, double* target_val3,
                          double* target_scalar, double base_rate, double base_val) {
          // central difference on the Newton unknown for this column
          const double scale = 1.0 + std::abs(base_rate) + std::abs(base_val);
          const double d = 1e-6 * scale;
          if (target_scalar) {
            const double saved = *target_scalar;
            *target_scalar = saved + d;
            element_residual(e, pert, lag, rp);
            *target_scalar = saved - d;
            element_residual(e, pert, lag, rm);
            *target_scalar = saved;
            for (int k = 0; k < 24; ++k) K[k][col] = (rp[k] - rm[k]) / (2 * d);
          } else {
            const double sr = *target_rate3, sv = *target_val3;
            *target_rate3 = sr + c_rate * d;
            *target_val3 = sv + c_val * d;
            element_residual(e, pert, lag, rp);
            *target_rate3 = sr - c_rate * d;
            *target_val3 = sv - c_val * d;
            element_residual(e, pert, lag, rm);
            *target_rate3 = sr;
            *target_val3 = sv;
            for (int k = 0; k < 24; ++k) K[k][col] = (rp[k] - rm[k]) / (2 * d);
          }
        };
        for (int a = 0; a < 4; ++a) {
          if (act.flow) {
            for (int i = 0; i < 3; ++i)
              column(3 * a + i, &pert.u_dot[a][i], &pert.u[a][i], nullptr,
                     ls.u_dot[a][i], ls.u[a][i]);
            column(12 + a, nullptr, nullptr, &pert.p[a], ls.p[a], 0.0);
          }
          if (act.temperature)
            column(16 + a, &pert.T_dot[a], &pert.T[a], nullptr, ls.T_dot[a], ls.T[a]);
          if (act.levelset)
            column(20 + a, &pert.phi_dot[a], &pert.phi[a], nullptr, ls.phi_dot[a],
                   ls.phi[a]);
        }
      } else {
        analytic_element_jacobian(e, ls, lag, c_rate, c_val, K);
      }

      const DofMap dm = make_dof_map(el, act);
      for (int kr = 0; kr < 24; ++kr) {
        const auto& er = dm.map[kr];
        if (er.field < 0) continue;
        if (row_constrained(bc, er.field, er.index)) continue;
        for (int kc = 0; kc < 24; ++kc) {
          const auto& ec = dm.map[kc];
          if (ec.field < 0) continue;
          const double v = K[kr][kc];
          if (v != 0.0)
            trip[4 * er.field + ec.field].emplace_back(er.index, ec.index, v);
        }
      }
    }
  }

  for (int rb = 0; rb < 4; ++rb) {
    for (int cb = 0; cb < 4; ++cb) {
      std::vector<Trip> merged;
      size_t nt = 0;
      for (int t = 0; t < nthreads; ++t) nt += tls[t][4 * rb + cb].size();
      // Identity rows for constrained dofs live on the diagonal blocks.
      merged.reserve(nt + (rb == cb ? dims[rb] : 0));
      for (int t = 0; t < nthreads; ++t)
        merged.insert(merged.end(), tls[t][4 * rb + cb].begin(),
                      tls[t][4 * rb + cb].end());
      if (bc && rb == cb && dims[rb] > 0) {
        for (int i = 0; i < dims[rb]; ++i)
          if (row_constrained(bc, rb, i)) merged.emplace_back(i, i, 1.0);
      }
      J.block[rb][cb].resize(dims[rb], dims[cb]);
      J.block[rb][cb].setFromTriplets(merged.begin(), merged.end());
    }
  }
}

}  // namespace meltkit
