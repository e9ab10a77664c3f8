#include "meltkit/levelset.hpp"

#include <cmath>

namespace meltkit {

double heaviside(double phi, double eps) {
  if (phi <= -eps) return 0.0;
  if (phi >= eps) return 1.0;
  return 0.5 * (1.0 + phi / eps + std::sin(M_PI * phi / eps) / M_PI);
}

double heaviside_deriv(double phi, double eps) {
  if (phi <= -eps || phi >= eps) return 0.0;
  return 0.5 / eps * (1.0 + std::cos(M_PI * phi / eps));
}

double dirac_scaled(double phi, double eps, double rho_local, const BlendParams& blend) {
  return 2.0 * rho_local / (blend.rho_m + blend.rho_g) * heaviside_deriv(phi, eps);
}

double liquid_fraction(double T, double T_s, double T_l) {
  if (T < T_s) return 0.0;
  if (T > T_l) return 1.0;
  return (T - T_s) / (T_l - T_s);
}

double liquid_fraction_deriv(double T, double T_s, double T_l) {
  if (T < T_s || T > T_l) return 0.0;
  return 1.0 / (T_l - T_s);
}

namespace {
double poly_eval(const std::vector<double>& c, double T) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * T + *it;
  return v;
}
}  // namespace

double PhaseProperties::solid_cp(double T) const {
  return cp_s_poly.empty() ? cp_s : poly_eval(cp_s_poly, T);
}

double PhaseProperties::solid_k(double T) const {
  return k_s_poly.empty() ? k_s : poly_eval(k_s_poly, T);
}

void PhaseProperties::phase_values(Property which, double T,
                                   double& s, double& l, double& g) const {
  switch (which) {
    case Property::Density: s = rho_s; l = rho_l; g = rho_g; break;
    case Property::Viscosity: s = mu_s; l = mu_l; g = mu_g; break;
    case Property::SpecificHeat: s = solid_cp(T); l = cp_l; g = cp_g; break;
    case Property::Conductivity: s = solid_k(T); l = k_l; g = k_g; break;
  }
}

double blend_property(double phi, double f_l, const PhaseProperties& props,
                      Property which, double eps, double T) {
  double s, l, g;
  props.phase_values(which, T, s, l, g);
  const double H = heaviside(phi, eps);
  return H * ((1.0 - f_l) * s + f_l * l) + (1.0 - H) * g;
}

std::optional<Vec3> interface_normal(const Vec3& grad_phi, double tol) {
  const double mag = grad_phi.norm();
  if (mag <= tol) return std::nullopt;
  return Vec3(-grad_phi / mag);
}

ScalarField curvature(const Mesh& mesh, const ScalarField& phi, double tol) {
  const int nn = mesh.num_nodes();

  // Stage 1: lumped-mass projection of the element gradients to the nodes.
  VectorField g_node(mesh);
  Eigen::VectorXd lump = Eigen::VectorXd::Zero(nn);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Vec3 g = element_gradient(mesh, e, phi.values);
    const double w = mesh.volume[e] / 4.0;
    for (int a = 0; a < 4; ++a) {
      const int n = mesh.elements[e][a];
      g_node.at(n) += w * g;
      lump[n] += w;
    }
  }
  for (int n = 0; n < nn; ++n) {
    if (lump[n] > 0.0) g_node.at(n) /= lump[n];
    const double mag = g_node.at(n).norm();
    if (mag > tol)
      g_node.at(n) /= mag;
    else
      g_node.at(n).setZero();
  }

  // Stage 2: project div of the normalized nodal gradient field.
  ScalarField kbar(mesh, 0.0);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    double div = 0.0;
    for (int a = 0; a < 4; ++a)
      div += g_node.at(mesh.elements[e][a]).dot(mesh.grad_N[e][a]);
    const double w = mesh.volume[e] / 4.0;
    for (int a = 0; a < 4; ++a) kbar[mesh.elements[e][a]] += w * div;
  }
  for (int n = 0; n < nn; ++n)
    kbar[n] = (lump[n] > 0.0 && g_node.at(n).squaredNorm() > 0.0) ? kbar[n] / lump[n] : 0.0;
  return kbar;
}

}  // namespace meltkit
