#pragma once

// Level-set utilities: regularized Heaviside/Dirac, liquid fraction,
// phase-blended material properties, interface normal, nodal curvature.
// The level set is a signed distance, positive in the metal phase.

#include <optional>

#include "meltkit/mesh.hpp"

namespace meltkit {

struct BlendParams {
  double eps_interface = 0.0;  // numerical interface half-thickness (m)
  double rho_m = 0.0;          // metal density (kg/m^3)
  double rho_g = 0.0;          // gas density (kg/m^3)
};

// Regularized Heaviside, C^1, ramps over |phi| < eps.
double heaviside(double phi, double eps);

// dH/dphi of the regularized Heaviside; compact support |phi| < eps.
double heaviside_deriv(double phi, double eps);

// Density-scaled Dirac delta (2 rho / (rho_m + rho_g)) dH/dphi.
double dirac_scaled(double phi, double eps, double rho_local, const BlendParams& blend);

// Piecewise-linear liquid fraction ramp between solidus and liquidus.
double liquid_fraction(double T, double T_s, double T_l);
double liquid_fraction_deriv(double T, double T_s, double T_l);

enum class Property { Density, Viscosity, SpecificHeat, Conductivity };

// Per-phase property values; solid specific heat and conductivity may carry
// polynomial temperature dependence (coefficients in ascending powers of T).
struct PhaseProperties {
  double rho_s = 0, rho_l = 0, rho_g = 0;
  double mu_s = 0, mu_l = 0, mu_g = 0;
  double cp_s = 0, cp_l = 0, cp_g = 0;
  double k_s = 0, k_l = 0, k_g = 0;
  std::vector<double> cp_s_poly;  // overrides cp_s when non-empty
  std::vector<double> k_s_poly;   // overrides k_s when non-empty

  double solid_cp(double T) const;
  double solid_k(double T) const;
  // Phase values (solid,liquid,gas) of the requested property at T.
  void phase_values(Property which, double T, double& s, double& l, double& g) const;
};

// H(phi) [(1-f_l) chi_s + f_l chi_l] + (1-H(phi)) chi_g
double blend_property(double phi, double f_l, const PhaseProperties& props,
                      Property which, double eps, double T);

// Unit normal pointing from metal into gas: n = -grad(phi)/|grad(phi)|.
// Empty when |grad(phi)| <= tol (caller drops interface-force contributions).
std::optional<Vec3> interface_normal(const Vec3& grad_phi, double tol = 1e-10);

// Nodal mean curvature  kbar = -div(n) = div(grad(phi)/|grad(phi)|)
// via two lumped-mass L2 projections (gradient to nodes, then divergence of
// the normalized nodal gradient). Degenerate nodes get 0.
ScalarField curvature(const Mesh& mesh, const ScalarField& phi, double tol = 1e-10);

}  // namespace meltkit
