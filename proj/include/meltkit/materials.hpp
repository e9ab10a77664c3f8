#pragma once

// Material definitions: per-phase properties, melting range, latent heats,
// surface tension data, evaporation constants. Loadable from key=value text
// files; built-in sets cover the shipped benchmark presets.

#include <string>

#include "meltkit/levelset.hpp"

namespace meltkit {

struct EvaporationModel {
  double zeta = 0.4;              // condensation factor (-)
  double m_mol = 0.0;             // molar mass (kg/mol)
  double R_gas = 8.314462618;     // J/(mol K)
  double L_v = 0.0;               // latent heat of vaporization (J/kg)
  double T_evap = 0.0;            // boiling temperature (K)
  double P_amb = 101000.0;        // ambient pressure (Pa)
};

// Sulfur-dependent Marangoni coefficient parameters (Fe-S system).
// Units follow the segregation model: tau_s in kmol/m^2, enthalpies in
// J/kmol, gas constant in J/(kmol K); a_i is the sulfur weight percentage.
struct SulfurMarangoniParams {
  double dsdT0 = -5e-4;           // pure-metal coefficient (N/m/K)
  double tau_s = 1.3e-8;          // saturation surface excess (kmol/m^2)
  double k_i = 3.18e-3;           // entropy factor (-)
  double dH0 = -1.66e8;           // standard heat of absorption (J/kmol)
  double dHM = 0.0;               // partial molar enthalpy of mixing (J/kmol)
  double a_i = 0.0;               // sulfur activity (wt %)
  double R = 8314.462618;         // gas constant (J/(kmol K))
};

struct SurfaceForceModel {
  double sigma0 = 0.0;            // surface tension at T0 (N/m)
  double T0 = 300.0;
  double dsigma_dT = 0.0;         // constant Marangoni coefficient (N/m/K)
  bool use_sulfur = false;
  SulfurMarangoniParams sulfur;

  double marangoni(double T) const;        // d(sigma)/dT at T
  double surface_tension(double T) const;  // sigma0 + marangoni(T) (T - T0)
};

struct Material {
  PhaseProperties props;
  double T_s = 0.0, T_l = 0.0;    // solidus / liquidus (K)
  double L_m = 0.0;               // latent heat of fusion (J/kg)
  SurfaceForceModel surface;
  EvaporationModel evap;
  bool has_evaporation = false;
  double emissivity = -1.0;       // required input when radiation is enabled
};

// key=value text, '#' comments; keys match the property-table names
// (rho_s, cp_l, k_g, T_l, L_v, sigma_0, dsigma_dT, cp_s_poly, ...).
Material load_material(const std::string& path);

Material ti6al4v_material();        // LPBF presets
Material ss316l_material();         // DED preset
Material spotweld_steel_material(); // laser spot weld preset (Fe-S)

}  // namespace meltkit
