#include "meltkit/materials.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace meltkit {

double SurfaceForceModel::marangoni(double T) const {
  if (!use_sulfur) return dsigma_dT;
  const auto& s = sulfur;
  const double K = s.k_i * std::exp(-s.dH0 / (s.R * T));
  const double Ka = K * s.a_i;
  return s.dsdT0 - s.R * s.tau_s * std::log1p(Ka) -
         Ka / (1.0 + Ka) * s.tau_s * (s.dH0 - s.dHM) / T;
}

double SurfaceForceModel::surface_tension(double T) const {
  return sigma0 + marangoni(T) * (T - T0);
}

namespace {

std::vector<double> parse_poly(const std::string& s) {
  std::istringstream in(s);
  std::vector<double> c;
  double v;
  while (in >> v) c.push_back(v);
  return c;
}

}  // namespace

Material load_material(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open material file: " + path);
  std::unordered_map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto pos = line.find('#');
    if (pos != std::string::npos) line.erase(pos);
    pos = line.find('=');
    if (pos == std::string::npos) continue;
    auto trim = [](std::string s) {
      const char* ws = " \t\r\n";
      s.erase(0, s.find_first_not_of(ws));
      s.erase(s.find_last_not_of(ws) + 1);
      return s;
    };
    kv[trim(line.substr(0, pos))] = trim(line.substr(pos + 1));
  }

  Material m;
  auto get = [&](const std::string& key, double& dst, bool required = false) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      if (required) throw std::runtime_error("material file missing key: " + key);
      return;
    }
    dst = std::stod(it->second);
  };
  auto& p = m.props;
  get("rho_s", p.rho_s, true);
  get("rho_l", p.rho_l, true);
  get("rho_g", p.rho_g, true);
  get("mu_s", p.mu_s, true);
  get("mu_l", p.mu_l, true);
  get("mu_g", p.mu_g, true);
  get("cp_s", p.cp_s);
  get("cp_l", p.cp_l, true);
  get("cp_g", p.cp_g, true);
  get("k_s", p.k_s);
  get("k_l", p.k_l, true);
  get("k_g", p.k_g, true);
  if (kv.count("cp_s_poly")) p.cp_s_poly = parse_poly(kv["cp_s_poly"]);
  if (kv.count("k_s_poly")) p.k_s_poly = parse_poly(kv["k_s_poly"]);
  if (p.cp_s == 0 && p.cp_s_poly.empty())
    throw std::runtime_error("material file needs cp_s or cp_s_poly");
  if (p.k_s == 0 && p.k_s_poly.empty())
    throw std::runtime_error("material file needs k_s or k_s_poly");
  get("T_s", m.T_s, true);
  get("T_l", m.T_l, true);
  if (!(m.T_s < m.T_l)) throw std::runtime_error("material requires T_s < T_l");
  get("L_m", m.L_m, true);
  get("sigma_0", m.surface.sigma0);
  get("dsigma_dT", m.surface.dsigma_dT);
  get("T0", m.surface.T0);
  get("emissivity", m.emissivity);
  if (kv.count("marangoni_model") && kv["marangoni_model"] == "sulfur") {
    m.surface.use_sulfur = true;
    auto& s = m.surface.sulfur;
    get("dsdT0", s.dsdT0);
    get("tau_s", s.tau_s);
    get("k_i", s.k_i);
    get("dH0", s.dH0);
    get("dHM", s.dHM);
    get("a_i", s.a_i);
  }
  if (kv.count("T_evap")) {
    m.has_evaporation = true;
    get("T_evap", m.evap.T_evap);
    get("L_v", m.evap.L_v, true);
    get("m_mol", m.evap.m_mol, true);
    get("zeta", m.evap.zeta);
    get("P_amb", m.evap.P_amb);
  }
  return m;
}

Material ti6al4v_material() {
  Material m;
  auto& p = m.props;
  p.rho_s = 4400.0;
  p.rho_l = 4400.0;
  p.rho_g = 0.894;
  p.mu_s = 1.0e6;
  p.mu_l = 5.0e-3;
  p.mu_g = 1.5e-5;
  p.cp_s = 670.0;
  p.cp_l = 730.0;
  p.cp_g = 680.0;
  p.k_s = 21.0;
  p.k_l = 29.0;
  p.k_g = 0.028;
  m.T_s = 1878.0;
  m.T_l = 1928.0;
  m.L_m = 2.9e5;
  m.surface.sigma0 = 1.68;
  m.surface.dsigma_dT = -2.6e-4;
  m.surface.T0 = 300.0;
  m.emissivity = 0.4;
  m.has_evaporation = true;
  m.evap.T_evap = 3533.0;
  m.evap.L_v = 9.6e6;
  m.evap.m_mol = 0.0478;  // elemental Ti
  m.evap.zeta = 0.4;
  m.evap.P_amb = 101000.0;
  return m;
}

Material ss316l_material() {
  Material m;
  auto& p = m.props;
  p.rho_s = 7800.0;
  p.rho_l = 7800.0;
  p.rho_g = 0.864;
  p.mu_s = 1.0e4;
  p.mu_l = 0.007;
  p.mu_g = 1.5e-5;
  p.cp_s_poly = {330.9, 0.563, -4.015e-4, 9.465e-8};
  p.cp_l = 769.9;
  p.cp_g = 680.0;
  p.k_s_poly = {11.82, 0.0106};
  p.k_l = 40.95;
  p.k_g = 0.028;
  m.T_s = 1693.0;
  m.T_l = 1733.0;
  m.L_m = 2.72e5;
  m.surface.sigma0 = 1.5;
  m.surface.dsigma_dT = -4.0e-4;
  m.surface.T0 = 300.0;
  m.emissivity = 0.4;
  return m;
}

Material spotweld_steel_material() {
  Material m;
  auto& p = m.props;
  p.rho_s = 8100.0;
  p.rho_l = 8100.0;
  p.rho_g = 0.864;
  p.mu_s = 1.0e3;
  p.mu_l = 0.006;
  p.mu_g = 1.5e-5;
  p.cp_s = 627.0;
  p.cp_l = 723.14;
  p.cp_g = 680.0;
  p.k_s = 22.9;
  p.k_l = 22.9;
  p.k_g = 0.028;
  m.T_s = 1610.0;
  m.T_l = 1630.0;
  m.L_m = 2.508e5;
  m.surface.sigma0 = 1.6;
  m.surface.T0 = 300.0;
  m.surface.use_sulfur = true;  // a_i set by the preset
  m.emissivity = 0.4;
  return m;
}

}  // namespace meltkit
