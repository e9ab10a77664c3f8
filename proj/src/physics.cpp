#include "meltkit/physics.hpp"

#include <cmath>
#include <stdexcept>

namespace meltkit {

double saturation_pressure(double T, const EvaporationModel& m) {
  return m.P_amb * std::exp(-m.L_v * m.m_mol / m.R_gas * (1.0 / T - 1.0 / m.T_evap));
}

double evaporation_flux(double T, const EvaporationModel& m) {
  return m.zeta * saturation_pressure(T, m) * std::sqrt(m.m_mol / (2.0 * M_PI * m.R_gas * T));
}

double evaporation_flux_deriv(double T, const EvaporationModel& m) {
  // m_e = C P_sat(T) T^{-1/2}; dP_sat/dT = P_sat L_v m_mol / (R T^2)
  const double me = evaporation_flux(T, m);
  return me * (m.L_v * m.m_mol / (m.R_gas * T * T) - 0.5 / T);
}

double recoil_pressure(double T, const EvaporationModel& m) {
  return 0.54 * saturation_pressure(T, m);
}

double marangoni_coefficient_sulfur(double T, const SulfurMarangoniParams& s) {
  const double K = s.k_i * std::exp(-s.dH0 / (s.R * T));
  const double Ka = K * s.a_i;
  return s.dsdT0 - s.R * s.tau_s * std::log1p(Ka) -
         Ka / (1.0 + Ka) * s.tau_s * (s.dH0 - s.dHM) / T;
}

Vec3 interfacial_force(const InterfacePointState& s, const BlendParams& blend,
                       const SurfaceForceModel& surface,
                       const EvaporationModel* evap, double tol_grad) {
  // grad(phi) of a re-initialized field is O(1); below tol it is degenerate.
  const double grad_mag = s.grad_phi.norm();
  if (grad_mag <= tol_grad) return Vec3::Zero();
  const Vec3 n = -s.grad_phi / grad_mag;

  const double delta = dirac_scaled(s.phi, s.eps, s.rho, blend);
  Vec3 f = Vec3::Zero();

  if (delta != 0.0) {
    // Surface tension and Marangoni traction.
    const double sigma = surface.surface_tension(s.T);
    f += delta * sigma * s.kappa_bar * n;
    const Vec3 grad_T_tan = s.grad_T - n * n.dot(s.grad_T);
    f += delta * surface.marangoni(s.T) * grad_T_tan;
  }

  if (evap) {
    const double me = evaporation_flux(s.T, *evap);
    const double dme = evaporation_flux_deriv(s.T, *evap);
    // f_e = grad(m_e^2 / rho), chain rule through T and the blended density.
    f += 2.0 * me * dme / s.rho * s.grad_T - me * me / (s.rho * s.rho) * s.grad_rho;
    if (delta != 0.0) f += -delta * recoil_pressure(s.T, *evap) * n;
  }
  return f;
}

double heat_source_terms(double T, double delta_rho, double I_s,
                         const HeatSourceModel& model, const EvaporationModel* evap) {
  if (delta_rho == 0.0) return 0.0;
  double Q = delta_rho * I_s;
  if (model.radiation) {
    if (model.emissivity < 0.0)
      throw std::invalid_argument("HeatSourceModel.emissivity must be set");
    const double T2 = T * T, T02 = model.T0 * model.T0;
    Q -= delta_rho * model.sigma_sb * model.emissivity * (T2 * T2 - T02 * T02);
  }
  if (evap) Q -= delta_rho * evap->L_v * evaporation_flux(T, *evap);
  return Q;
}

double ded_absorbed_power(double T, const DedParams& ded, const PhaseProperties& props) {
  if (T <= ded.T0) return 0.0;
  // Composite Simpson; the integrand is at most cubic so this converges fast.
  const int n = 64;  // even
  const double h = (T - ded.T0) / n;
  double sum = props.solid_cp(ded.T0) + props.solid_cp(T);
  for (int i = 1; i < n; ++i)
    sum += props.solid_cp(ded.T0 + i * h) * (i % 2 ? 4.0 : 2.0);
  return ded.m_dot * sum * h / 3.0;
}

double ded_surface_flux(const Vec3& x, const Vec3& x_c, const Vec3& n,
                        double delta_rho, double Q_v, const DedParams& ded) {
  if (delta_rho == 0.0) return 0.0;
  const double dx = x[0] - x_c[0], dy = x[1] - x_c[1];
  const double r2 = dx * dx + dy * dy;
  const double peak = ded.d * (ded.eta_p * ded.Q - Q_v) / (M_PI * ded.r_b * ded.r_b);
  const double tilt = std::max(n[2], 0.0);
  return peak * std::exp(-ded.d * r2 / (ded.r_b * ded.r_b)) * tilt * delta_rho;
}

double recoil_force_integral(const Mesh& mesh, const ScalarField& T,
                             const ScalarField& phi, double eps_factor,
                             const BlendParams& blend, const PhaseProperties& props,
                             double T_s, double T_l, const EvaporationModel& evap) {
  // 4-point tet rule on P_recoil(T) delta_rho(phi).
  static const double qa = 0.5854101966249685, qb = 0.13819660112501052;
  static const double bary[4][4] = {{qa, qb, qb, qb}, {qb, qa, qb, qb},
                                    {qb, qb, qa, qb}, {qb, qb, qb, qa}};
  double F = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements[e];
    const double eps = eps_factor * mesh.h_min[e];
    const double w = mesh.volume[e] / 4.0;
    for (int q = 0; q < 4; ++q) {
      double Tq = 0.0, phiq = 0.0;
      for (int a = 0; a < 4; ++a) {
        Tq += bary[q][a] * T.values[el[a]];
        phiq += bary[q][a] * phi.values[el[a]];
      }
      const double fl = liquid_fraction(Tq, T_s, T_l);
      const double rho = blend_property(phiq, fl, props, Property::Density, eps, Tq);
      const double delta = dirac_scaled(phiq, eps, rho, blend);
      if (delta == 0.0) continue;
      F -= recoil_pressure(Tq, evap) * delta * w;
    }
  }
  return F;
}

}  // namespace meltkit
