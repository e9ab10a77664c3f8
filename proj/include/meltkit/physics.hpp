#pragma once

// Constitutive closures at a point: evaporation and recoil, CSF interfacial
// forces, interfacial energy sources, DED powder heat sink, and diagnostic
// integrals over the domain.

#include "meltkit/materials.hpp"
#include "meltkit/mesh.hpp"

namespace meltkit {

// Clausius-Clapeyron saturation pressure (Pa).
double saturation_pressure(double T, const EvaporationModel& model);

// Net evaporation mass flux rate (kg/m^2 s).
double evaporation_flux(double T, const EvaporationModel& model);
double evaporation_flux_deriv(double T, const EvaporationModel& model);

// Recoil pressure, 0.54 * P_sat (Pa).
double recoil_pressure(double T, const EvaporationModel& model);

// d(sigma)/dT from the sulfur segregation model (N/m/K).
double marangoni_coefficient_sulfur(double T, const SulfurMarangoniParams& params);

// Pointwise state for the interfacial force evaluation.
struct InterfacePointState {
  double T = 300.0;
  Vec3 grad_T = Vec3::Zero();
  double phi = 0.0;
  Vec3 grad_phi = Vec3::Zero();
  double kappa_bar = 0.0;   // mean curvature (lagged nodal projection)
  double rho = 0.0;         // blended local density
  Vec3 grad_rho = Vec3::Zero();
  double eps = 0.0;         // interface half-thickness at this point
};

// f_sf = f_sigma + f_m + f_e + f_r (N/m^3). Evaporation terms are skipped
// when evap == nullptr. A degenerate level-set gradient yields zero force.
Vec3 interfacial_force(const InterfacePointState& s, const BlendParams& blend,
                       const SurfaceForceModel& surface,
                       const EvaporationModel* evap, double tol_grad = 1e-10);

struct HeatSourceModel {
  double sigma_sb = 5.67e-8;  // Stefan-Boltzmann (W/m^2 K^4)
  double emissivity = -1.0;   // required when radiation is on
  double T0 = 300.0;          // reference/ambient temperature
  bool radiation = true;
};

// Q_sf = Q_r + Q_e + Q_l (W/m^3); all terms carry the delta weighting.
double heat_source_terms(double T, double delta_rho, double I_s,
                         const HeatSourceModel& model, const EvaporationModel* evap);

// DED powder stream parameters.
struct DedParams {
  double Q = 0.0;       // laser power (W)
  double eta_p = 1.0;   // absorptivity (-)
  double r_b = 0.0;     // beam radius (m)
  double d = 2.0;       // distribution factor (-)
  double m_dot = 0.0;   // powder mass flow rate (kg/s)
  double T0 = 300.0;
};

// Energy absorbed heating the deposited powder from T0 to T:
// Q_v = m_dot * integral of c_p,s over [T0, T] (W). Composite-Simpson
// quadrature of the (possibly polynomial) solid specific heat.
double ded_absorbed_power(double T, const DedParams& ded, const PhaseProperties& props);

// Remaining laser energy entering the metal through the CSF model, evaluated
// at one point (W/m^3): Gaussian of in-plane distance from the laser center,
// tilted by n.e3 and localized by delta_rho.
double ded_surface_flux(const Vec3& x, const Vec3& x_c, const Vec3& n,
                        double delta_rho, double Q_v, const DedParams& ded);

// F_z = -int P_recoil * delta_rho dOmega over the whole mesh (N).
double recoil_force_integral(const Mesh& mesh, const ScalarField& T,
                             const ScalarField& phi, double eps_factor,
                             const BlendParams& blend, const PhaseProperties& props,
                             double T_s, double T_l, const EvaporationModel& evap);

// Hall-Petch style strengthening constants (SI: Pa and Pa sqrt(m)).
struct MicrostructureConstants {
  double sigma0_y = 240.0e6;
  double K_y = 279.0e6 * 1e-3;  // 279 MPa um^1/2 in Pa m^1/2
};

}  // namespace meltkit
