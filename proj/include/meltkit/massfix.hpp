#pragma once

// Global metal-mass accounting and the scalar level-set shift restoring
// conservation, including the accumulated evaporated mass.

#include "meltkit/materials.hpp"
#include "meltkit/mesh.hpp"
#include "meltkit/redistance.hpp"

namespace meltkit {

// m_t = integral of rho_m H(phi) over the domain; eps = eps_factor * h_elem.
double metal_mass(const Mesh& mesh, const ScalarField& phi, double rho_m,
                  double eps_factor);

// (m0 - m_t - evap_accum) / m0
double mass_error(double m0, double m_t, double evap_accum);

struct MassFixResult {
  double delta_phi = 0.0;
  double residual = 0.0;  // mass defect after the shift (kg)
  int iterations = 0;
};

// Shifts phi by the global constant that solves
//   m_t(phi + dphi) + evap_accum - m0 = 0
// to |residual| < 1e-12 m0, safeguarded secant/bisection on a geometrically
// expanded bracket. Throws std::runtime_error when the target mass is not
// attainable.
MassFixResult fix_mass(const Mesh& mesh, ScalarField& phi, double m0,
                       double evap_accum, double rho_m, double eps_factor);

// Instantaneous evaporated-mass rate integral over the triangulated
// interface (kg/s): sum of m_e(T at triangle centroid) * area.
double evaporation_rate_integral(const Mesh& mesh, const InterfaceTriangulation& tri,
                                 const ScalarField& T, const EvaporationModel& evap);

}  // namespace meltkit
