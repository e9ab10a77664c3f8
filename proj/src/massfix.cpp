#include "meltkit/massfix.hpp"

#include <cmath>
#include <stdexcept>

#include "meltkit/physics.hpp"

namespace meltkit {

namespace {

constexpr double kQa = 0.5854101966249685;
constexpr double kQb = 0.13819660112501052;
constexpr double kBary[4][4] = {{kQa, kQb, kQb, kQb},
                                {kQb, kQa, kQb, kQb},
                                {kQb, kQb, kQa, kQb},
                                {kQb, kQb, kQb, kQa}};

struct QuadPoint {
  double phi, eps, w;
};

// All quadrature points of phi with their local interface thickness.
std::vector<QuadPoint> collect_quad_points(const Mesh& mesh, const ScalarField& phi,
                                           double eps_factor) {
  std::vector<QuadPoint> qps;
  qps.reserve(4 * mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements[e];
    const double eps = eps_factor * mesh.h_min[e];
    const double w = mesh.volume[e] / 4.0;
    for (int q = 0; q < 4; ++q) {
      double v = 0.0;
      for (int a = 0; a < 4; ++a) v += kBary[q][a] * phi.values[el[a]];
      qps.push_back({v, eps, w});
    }
  }
  return qps;
}

}  // namespace

double metal_mass(const Mesh& mesh, const ScalarField& phi, double rho_m,
                  double eps_factor) {
  double m = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements[e];
    const double eps = eps_factor * mesh.h_min[e];
    const double w = mesh.volume[e] / 4.0;
    for (int q = 0; q < 4; ++q) {
      double v = 0.0;
      for (int a = 0; a < 4; ++a) v += kBary[q][a] * phi.values[el[a]];
      m += w * heaviside(v, eps);
    }
  }
  return rho_m * m;
}

double mass_error(double m0, double m_t, double evap_accum) {
  return (m0 - m_t - evap_accum) / m0;
}

MassFixResult fix_mass(const Mesh& mesh, ScalarField& phi, double m0,
                       double evap_accum, double rho_m, double eps_factor) {
  const double target = m0 - evap_accum;
  const std::vector<QuadPoint> qps = collect_quad_points(mesh, phi, eps_factor);

  double domain_mass = 0.0, eps_max = 0.0, phi_span = 0.0;
  for (const auto& q : qps) {
    domain_mass += q.w;
    eps_max = std::max(eps_max, q.eps);
    phi_span = std::max(phi_span, std::abs(q.phi));
  }
  domain_mass *= rho_m;
  if (target < -1e-12 * m0 || target > domain_mass * (1.0 + 1e-12))
    throw std::runtime_error("fix_mass: target mass outside attainable range");

  // Band/constant split for a cheap mass evaluation under shifts up to cap.
  double cap = 2.0 * eps_max;
  double const_mass = 0.0;
  std::vector<QuadPoint> band;
  auto rebuild = [&](double c) {
    const_mass = 0.0;
    band.clear();
    for (const auto& q : qps) {
      if (q.phi >= q.eps + c)
        const_mass += q.w;
      else if (q.phi > -(q.eps + c))
        band.push_back(q);
    }
    const_mass *= rho_m;
  };
  rebuild(cap);
  auto mass_at = [&](double d) {
    double m = 0.0;
    for (const auto& q : band) m += q.w * heaviside(q.phi + d, q.eps);
    return const_mass + rho_m * m;
  };
  auto f = [&](double d) { return mass_at(d) - target; };

  MassFixResult res;
  const double f0 = f(0.0);
  const double tol = 1e-12 * m0;
  if (std::abs(f0) <= tol) {
    res.residual = f0;
    return res;
  }

  // Expand the bracket geometrically; f is monotone non-decreasing in d.
  double lo = -eps_max, hi = eps_max;
  while (true) {
    if (std::max(std::abs(lo), std::abs(hi)) > cap) {
      cap = 2.0 * std::max(std::abs(lo), std::abs(hi));
      rebuild(cap);
    }
    if (f(lo) <= 0.0 && f(hi) >= 0.0) break;
    lo *= 2.0;
    hi *= 2.0;
    if (std::abs(hi) > 4.0 * (phi_span + eps_max))
      throw std::runtime_error("fix_mass: bracketing failure");
  }

  double flo = f(lo), fhi = f(hi);
  double d = 0.0, fd = f0;
  if (fd < 0.0)
    lo = 0.0, flo = fd;
  else
    hi = 0.0, fhi = fd;
  for (int it = 0; it < 200; ++it) {
    res.iterations = it + 1;
    // Secant proposal, safeguarded into the bracket, else bisection.
    double step = (fhi != flo) ? hi - fhi * (hi - lo) / (fhi - flo) : 0.5 * (lo + hi);
    if (!(step > lo && step < hi)) step = 0.5 * (lo + hi);
    d = step;
    fd = f(d);
    res.residual = fd;
    if (std::abs(fd) <= tol) break;
    if (fd < 0.0)
      lo = d, flo = fd;
    else
      hi = d, fhi = fd;
    if (hi - lo < 1e-18 * (1.0 + std::abs(d))) break;
  }

  res.delta_phi = d;
  phi.values.array() += d;
  return res;
}

double evaporation_rate_integral(const Mesh& mesh, const InterfaceTriangulation& tri,
                                 const ScalarField& T, const EvaporationModel& evap) {
  double rate = 0.0;
  for (const auto& t : tri.triangles) {
    const Vec3 c = (tri.points[t.p[0]].position + tri.points[t.p[1]].position +
                    tri.points[t.p[2]].position) / 3.0;
    const int e = t.source_element;
    const Vec3 ec = mesh.centroid(e);
    double Tc = 0.0;
    for (int a = 0; a < 4; ++a) {
      const double Na = 0.25 + mesh.grad_N[e][a].dot(c - ec);
      Tc += Na * T.values[mesh.elements[e][a]];
    }
    rate += evaporation_flux(Tc, evap) * t.area;
  }
  return rate;
}

}  // namespace meltkit
