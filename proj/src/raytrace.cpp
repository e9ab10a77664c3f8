#include "meltkit/raytrace.hpp"

#include <cmath>
#include <stdexcept>

namespace meltkit {

double gaussian_intensity(const Vec3& x, const LaserConfig& cfg) {
  const Vec3 d = x - cfg.x0;
  const double axial = d.dot(cfg.direction);
  const double r2 = d.squaredNorm() - axial * axial;
  return 2.0 * cfg.Q * cfg.eta / (M_PI * cfg.r_b * cfg.r_b) *
         std::exp(-2.0 * std::max(r2, 0.0) / (cfg.r_b * cfg.r_b));
}

namespace {

void beam_plane_basis(const Vec3& dir, Vec3& e1, Vec3& e2) {
  const Vec3 ref = (std::abs(dir[0]) < 0.9) ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
  e1 = dir.cross(ref).normalized();
  e2 = dir.cross(e1).normalized();
}

}  // namespace

std::vector<Ray> decompose_laser(const LaserConfig& cfg) {
  if (cfg.n_ray < 1) throw std::invalid_argument("n_ray must be >= 1");
  const double R = cfg.r_cut_factor * cfg.r_b;
  std::vector<Ray> rays;

  if (cfg.n_ray == 1) {
    const double power = cfg.Q * cfg.eta * (1.0 - std::exp(-2.0 * R * R / (cfg.r_b * cfg.r_b)));
    rays.push_back({cfg.x0, cfg.direction, power});
    return rays;
  }

  Vec3 e1, e2;
  beam_plane_basis(cfg.direction, e1, e2);
  // Choose the grid so that about n_ray cell centers fall inside the disk.
  const int n = std::max(2, static_cast<int>(std::llround(std::sqrt(cfg.n_ray * 4.0 / M_PI))));
  const double dA = (2.0 * R / n) * (2.0 * R / n);
  rays.reserve(cfg.n_ray);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double a = -R + (i + 0.5) * 2.0 * R / n;
      const double b = -R + (j + 0.5) * 2.0 * R / n;
      if (a * a + b * b > R * R) continue;
      const Vec3 o = cfg.x0 + a * e1 + b * e2;
      rays.push_back({o, cfg.direction, gaussian_intensity(o, cfg) * dA});
    }
  }
  return rays;
}

double absorption_coefficient(double theta, double epsilon_c) {
  const double c = std::cos(theta);
  const double e = epsilon_c;
  const double f1 = (1.0 + (1.0 - e * c) * (1.0 - e * c)) /
                    (1.0 + (1.0 + e * c) * (1.0 + e * c));
  const double f2 = (e * e - 2.0 * e * c + 2.0 * c * c) /
                    (e * e + 2.0 * e * c + 2.0 * c * c);
  const double alpha = 1.0 - 0.5 * (f1 + f2);
  return std::clamp(alpha, 0.0, 1.0);
}

RayScene make_ray_scene(const InterfaceTriangulation& tri, const Mesh& mesh) {
  RayScene scene;
  scene.tri = &tri;
  if (tri.empty()) return scene;
  std::vector<Vec3> centroids, lo, hi;
  centroids.reserve(tri.triangles.size());
  scene.h_local.reserve(tri.triangles.size());
  for (const auto& t : tri.triangles) {
    const Vec3& a = tri.points[t.p[0]].position;
    const Vec3& b = tri.points[t.p[1]].position;
    const Vec3& c = tri.points[t.p[2]].position;
    centroids.push_back((a + b + c) / 3.0);
    lo.push_back(a.cwiseMin(b).cwiseMin(c));
    hi.push_back(a.cwiseMax(b).cwiseMax(c));
    scene.h_local.push_back(mesh.h_min[t.source_element]);
  }
  scene.tree = Octree(centroids);
  scene.tree.set_item_bounds(lo, hi);
  return scene;
}

namespace {

// Moller-Trumbore, no culling. Returns t >= 0 or -1.
double ray_triangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b,
                    const Vec3& c) {
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 p = d.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-300) return -1.0;
  const double inv = 1.0 / det;
  const Vec3 s = o - a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return -1.0;
  const Vec3 q = s.cross(e1);
  const double v = d.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return -1.0;
  const double t = e2.dot(q) * inv;
  return (t >= 0.0) ? t : -1.0;
}

}  // namespace

RayHit intersect_scene(const RayScene& scene, const Vec3& origin, const Vec3& dir) {
  RayHit best;
  if (!scene.tri || scene.tri->empty()) return best;
  scene.tree.visit_ray(origin, dir, [&](int tid) {
    const auto& t = scene.tri->triangles[tid];
    const double hit = ray_triangle(origin, dir, scene.tri->points[t.p[0]].position,
                                    scene.tri->points[t.p[1]].position,
                                    scene.tri->points[t.p[2]].position);
    if (hit >= 0.0 && (best.triangle < 0 || hit < best.t)) {
      best.triangle = tid;
      best.t = hit;
    }
  });
  if (best.triangle >= 0) best.point = origin + best.t * dir;
  return best;
}

RayPath trace_ray(const Ray& ray, const RayScene& scene, const LaserConfig& cfg) {
  if (cfg.epsilon_c < 0.0)
    throw std::invalid_argument("LaserConfig.epsilon_c must be set (material constant)");
  RayPath path;
  path.initial_energy = ray.energy;

  Vec3 o = ray.origin;
  Vec3 d = ray.dir.normalized();
  double incoming = ray.energy;  // I^r_{i,0} = I^0_i
  const double floor = cfg.energy_floor_rel * ray.energy;

  for (int bounce = 0; bounce < cfg.max_bounces; ++bounce) {
    const RayHit hit = intersect_scene(scene, o, d);
    if (hit.triangle < 0) {
      path.residual_energy = incoming;
      path.escaped = true;
      return path;
    }
    const auto& t = scene.tri->triangles[hit.triangle];
    const double cos_theta = std::clamp(std::abs(d.dot(t.normal)), 0.0, 1.0);
    const double theta = std::acos(cos_theta);
    const double alpha = absorption_coefficient(theta, cfg.epsilon_c);

    RayIntersection isec;
    isec.x = hit.point;
    isec.theta = theta;
    isec.absorbed = alpha * cos_theta * incoming;
    isec.reflected = (1.0 - alpha) * cos_theta * incoming;
    isec.triangle = hit.triangle;
    path.cosine_loss += (1.0 - cos_theta) * incoming;
    path.intersections.push_back(isec);

    incoming = isec.reflected;
    d = (d - 2.0 * d.dot(t.normal) * t.normal).normalized();
    o = hit.point + 1e-6 * scene.h_local[hit.triangle] * d;
    if (incoming < floor) break;
  }
  path.residual_energy = incoming;
  path.escaped = false;
  return path;
}

ScalarField deposit_energy(const std::vector<RayPath>& paths, const Mesh& mesh,
                           const ScalarField& phi, const RayScene& scene,
                           double beta_scale) {
  ScalarField I_s(mesh, 0.0);
  if (!scene.tri || scene.tri->empty()) return I_s;

  // Interface-adjacent nodes only; elsewhere the delta weighting is zero.
  std::vector<int> band;
  std::vector<Vec3> band_pos;
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    double h = std::numeric_limits<double>::max();
    for (int e : mesh.node_elems[i]) h = std::min(h, mesh.h_min[e]);
    if (mesh.node_elems[i].empty()) continue;
    if (std::abs(phi.values[i]) <= 3.0 * h) {
      band.push_back(i);
      band_pos.push_back(mesh.nodes[i]);
    }
  }
  if (band.empty()) return I_s;
  Octree band_tree(band_pos, 16);

  for (const auto& path : paths) {
    for (const auto& isec : path.intersections) {
      const double beta = beta_scale * scene.h_local[isec.triangle];
      const double cutoff = 4.0 * beta;
      const double norm = 1.0 / (2.0 * M_PI * beta * beta);
      for (int k : band_tree.radius_query(isec.x, cutoff)) {
        const double r2 = (band_pos[k] - isec.x).squaredNorm();
        I_s.values[band[k]] += isec.absorbed * norm * std::exp(-r2 / (2.0 * beta * beta));
      }
    }
  }
  return I_s;
}

}  // namespace meltkit
