#pragma once

// Laser decomposition into rays, multi-reflection tracing against the
// triangulated gas-metal interface (octree-accelerated), and deposition of
// the absorbed energy as a nodal source field.

#include "meltkit/redistance.hpp"

namespace meltkit {

struct LaserConfig {
  double Q = 0.0;       // laser power (W)
  double eta = 1.0;     // absorption coefficient of the beam profile (-)
  double r_b = 0.0;     // beam radius (m)
  Vec3 x0 = Vec3::Zero();             // beam center
  Vec3 direction = Vec3(0, 0, -1);    // unit propagation direction
  int n_ray = 1;
  double V_s = 0.0;     // scan speed (m/s), used by the driver for advection
  int max_bounces = 10;
  double epsilon_c = -1.0;  // electrical-conductance constant; required, no default
  double r_cut_factor = 2.0;       // seeding disk radius in beam radii
  double energy_floor_rel = 1e-6;  // stop tracing below this fraction of I0
};

// Beam intensity (W/m^2); |x - x0| is measured in the beam plane.
double gaussian_intensity(const Vec3& x, const LaserConfig& cfg);

struct Ray {
  Vec3 origin;
  Vec3 dir;       // unit
  double energy;  // I0_i (W)
};

// Midpoint-rule decomposition on a uniform grid over the seeding disk.
// n_ray == 1 degenerates to a single axis ray carrying the analytic
// disk-integrated power.
std::vector<Ray> decompose_laser(const LaserConfig& cfg);

// Angle-dependent ray absorption coefficient, clamped to [0,1].
// theta in [0, pi/2] is measured from the surface normal.
double absorption_coefficient(double theta, double epsilon_c);

struct RayIntersection {
  Vec3 x;
  double theta;      // incident angle
  double absorbed;   // I^a (W)
  double reflected;  // I^r (W)
  int triangle;      // index into the scene triangulation
};

struct RayPath {
  double initial_energy = 0.0;
  std::vector<RayIntersection> intersections;
  double residual_energy = 0.0;  // last reflected energy (escaped or floored)
  bool escaped = false;          // true when the last segment left the scene
  double cosine_loss = 0.0;      // sum of (1 - cos theta) I^r_prev over bounces
};

// Triangulation plus acceleration structure and per-triangle length scale.
struct RayScene {
  const InterfaceTriangulation* tri = nullptr;
  Octree tree;                  // over triangle centroids, item bounds = AABBs
  std::vector<double> h_local;  // source-element minimum edge per triangle
};

RayScene make_ray_scene(const InterfaceTriangulation& tri, const Mesh& mesh);

// Nearest ray-triangle intersection over the whole scene; t < 0 when none.
struct RayHit {
  int triangle = -1;
  double t = -1.0;
  Vec3 point = Vec3::Zero();
};
RayHit intersect_scene(const RayScene& scene, const Vec3& origin, const Vec3& dir);

// Repeated specular reflection with the absorbed/reflected recursion
//   I^a_j = alpha cos(theta) I^r_{j-1},  I^r_j = (1-alpha) cos(theta) I^r_{j-1}.
RayPath trace_ray(const Ray& ray, const RayScene& scene, const LaserConfig& cfg);

// Distributes every absorbed packet over interface-adjacent nodes with a 2D
// Gaussian of width beta = beta_scale * h_local, normalized on the tangent
// plane. Returns the nodal source I_s (W/m^2).
ScalarField deposit_energy(const std::vector<RayPath>& paths, const Mesh& mesh,
                           const ScalarField& phi, const RayScene& scene,
                           double beta_scale = 3.0);

}  // namespace meltkit
