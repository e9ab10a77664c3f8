#include "meltkit/redistance.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace meltkit {

double InterfaceTriangulation::total_area() const {
  double a = 0.0;
  for (const auto& t : triangles) a += t.area;
  return a;
}

std::vector<Vec3> InterfaceTriangulation::point_positions() const {
  std::vector<Vec3> xs;
  xs.reserve(points.size());
  for (const auto& p : points) xs.push_back(p.position);
  return xs;
}

namespace {

// phi with exact zeros nudged into the metal side.
Eigen::VectorXd nudged_levelset(const Mesh& mesh, const ScalarField& phi) {
  Eigen::VectorXd v = phi.values;
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    if (v[n] == 0.0) {
      double h = mesh.min_h();
      if (!mesh.node_elems[n].empty()) {
        h = std::numeric_limits<double>::max();
        for (int e : mesh.node_elems[n]) h = std::min(h, mesh.h_min[e]);
      }
      v[n] = 1e-12 * h;
    }
  }
  return v;
}

}  // namespace

InterfaceTriangulation extract_interface(const Mesh& mesh, const ScalarField& phi) {
  InterfaceTriangulation tri;
  const Eigen::VectorXd v = nudged_levelset(mesh, phi);

  // Cloud points are shared between elements through their edge.
  std::unordered_map<std::uint64_t, int> edge_point;
  auto cloud_point_on_edge = [&](int a, int b) {
    const int lo = std::min(a, b), hi = std::max(a, b);
    const std::uint64_t key = (static_cast<std::uint64_t>(lo) << 32) | static_cast<std::uint32_t>(hi);
    auto it = edge_point.find(key);
    if (it != edge_point.end()) return it->second;
    const double t = edge_zero_crossing(v[lo], v[hi]);
    CloudPoint cp;
    cp.position = (1.0 - t) * mesh.nodes[lo] + t * mesh.nodes[hi];
    const int id = static_cast<int>(tri.points.size());
    tri.points.push_back(std::move(cp));
    edge_point.emplace(key, id);
    return id;
  };

  auto emit_triangle = [&](int c0, int c1, int c2, const Vec3& toward_gas, int e) {
    const Vec3& a = tri.points[c0].position;
    const Vec3& b = tri.points[c1].position;
    const Vec3& c = tri.points[c2].position;
    Vec3 n = (b - a).cross(c - a);
    const double n2 = n.norm();
    if (!(n2 > 0.0)) return;  // degenerate sliver, carries no area
    InterfaceTriangle t;
    t.p[0] = c0;
    t.p[1] = c1;
    t.p[2] = c2;
    if (n.dot(toward_gas) < 0.0) {
      std::swap(t.p[1], t.p[2]);
      n = -n;
    }
    t.area = 0.5 * n2;
    t.normal = n / n2;
    t.source_element = e;
    const int tid = static_cast<int>(tri.triangles.size());
    tri.triangles.push_back(t);
    for (int k = 0; k < 3; ++k) tri.points[t.p[k]].incident_triangles.push_back(tid);
  };

  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements[e];
    int pos[4], neg[4], np = 0, nm = 0;
    for (int a = 0; a < 4; ++a) {
      if (v[el[a]] > 0.0)
        pos[np++] = el[a];
      else
        neg[nm++] = el[a];
    }
    if (np == 0 || nm == 0) continue;
    const Vec3 toward_gas = -element_gradient(mesh, e, v);
    if (np == 1 || np == 3) {
      // One lone node against the other three: a single triangle.
      const int lone = (np == 1) ? pos[0] : neg[0];
      const int(&others)[4] = (np == 1) ? neg : pos;
      int c[3];
      for (int k = 0; k < 3; ++k) c[k] = cloud_point_on_edge(lone, others[k]);
      emit_triangle(c[0], c[1], c[2], toward_gas, e);
    } else {
      // Two against two: a quad, split along one diagonal. Consecutive
      // corners share a tetrahedron face, so neighbours stitch watertight.
      const int c0 = cloud_point_on_edge(pos[0], neg[0]);
      const int c1 = cloud_point_on_edge(pos[0], neg[1]);
      const int c2 = cloud_point_on_edge(pos[1], neg[1]);
      const int c3 = cloud_point_on_edge(pos[1], neg[0]);
      emit_triangle(c0, c1, c2, toward_gas, e);
      emit_triangle(c0, c2, c3, toward_gas, e);
    }
  }

  average_normals(tri);
  return tri;
}

void average_normals(InterfaceTriangulation& tri) {
  for (auto& p : tri.points) {
    Vec3 sum = Vec3::Zero();
    double area_sum = 0.0;
    for (int t : p.incident_triangles) {
      sum += tri.triangles[t].normal * tri.triangles[t].area;
      area_sum += tri.triangles[t].area;
    }
    if (area_sum <= 0.0) continue;
    sum /= area_sum;
    const double mag = sum.norm();
    if (mag > 1e-12) {
      p.normal = sum / mag;
    } else {
      // Opposing normals cancel; take the largest-area incident triangle.
      int best = p.incident_triangles.front();
      for (int t : p.incident_triangles)
        if (tri.triangles[t].area > tri.triangles[best].area) best = t;
      p.normal = tri.triangles[best].normal;
    }
  }
}

Octree build_octree(const std::vector<Vec3>& points, int leaf_capacity, int max_depth) {
  return Octree(points, leaf_capacity, max_depth);
}

Octree::NearestHit nearest_cloud_point(const Octree& tree, const Vec3& x) {
  return tree.nearest(x);
}

RedistanceResult redistance_geometric(const Mesh& mesh, const ScalarField& phi,
                                      int leaf_capacity) {
  RedistanceResult res;
  res.phi_d = phi;
  res.tri = extract_interface(mesh, phi);
  if (res.tri.empty()) {
    res.status = RedistanceStatus::EmptyInterface;
    return res;
  }
  res.octree = build_octree(res.tri.point_positions(), leaf_capacity);

  const Eigen::VectorXd v = nudged_levelset(mesh, phi);
  const int nn = mesh.num_nodes();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nn; ++i) {
    const Vec3& x = mesh.nodes[i];
    const auto hit = res.octree.nearest(x);
    const CloudPoint& cp = res.tri.points[hit.index];
    double d = std::abs((x - cp.position).dot(cp.normal));
    d = std::min(d, hit.distance);  // projection cannot exceed the distance
    res.phi_d.values[i] = (v[i] > 0.0 ? 1.0 : -1.0) * d;
  }
  return res;
}

RedistanceResult redistance_pde(const Mesh& mesh, const ScalarField& phi,
                                int n_pseudo_steps) {
  RedistanceResult res;
  res.phi_d = phi;

  const Eigen::VectorXd v0 = nudged_levelset(mesh, phi);
  const int nn = mesh.num_nodes();
  const int ne = mesh.num_elements();

  std::vector<char> crossing_elem(ne, 0);
  std::vector<char> anchored(nn, 0);
  bool any_crossing = false;
  for (int e = 0; e < ne; ++e) {
    const auto& el = mesh.elements[e];
    bool has_pos = false, has_neg = false;
    for (int a = 0; a < 4; ++a) (v0[el[a]] > 0.0 ? has_pos : has_neg) = true;
    if (has_pos && has_neg) {
      crossing_elem[e] = 1;
      any_crossing = true;
      for (int a = 0; a < 4; ++a) anchored[el[a]] = 1;
    }
  }
  if (!any_crossing) {
    res.status = RedistanceStatus::EmptyInterface;
    return res;
  }

  Eigen::VectorXd w = v0;
  // Interface-adjacent nodes: local linear distance estimate keeps the zero
  // level set in place while the outer band is marched.
  for (int i = 0; i < nn; ++i) {
    if (!anchored[i]) continue;
    double gsum = 0.0, vol = 0.0;
    for (int e : mesh.node_elems[i]) {
      if (!crossing_elem[e]) continue;
      gsum += element_gradient(mesh, e, v0).norm() * mesh.volume[e];
      vol += mesh.volume[e];
    }
    const double gmag = (vol > 0.0) ? gsum / vol : 1.0;
    w[i] = v0[i] / std::max(gmag, 1e-12);
  }

  const double dtau = 0.3 * mesh.min_h();
  std::vector<Vec3> egrad(ne);
  std::vector<Vec3> ecent(ne);
  for (int e = 0; e < ne; ++e) ecent[e] = mesh.centroid(e);
  Eigen::VectorXd wn = w;

  for (int step = 0; step < n_pseudo_steps; ++step) {
#pragma omp parallel for schedule(static)
    for (int e = 0; e < ne; ++e) egrad[e] = element_gradient(mesh, e, w);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nn; ++i) {
      if (anchored[i]) {
        wn[i] = w[i];
        continue;
      }
      const double s = (v0[i] > 0.0) ? 1.0 : -1.0;
      // Upwind gradient magnitude: information flows away from the interface
      // along s * grad(w); take incident elements the node is downwind of.
      double up = 0.0, upvol = 0.0, all = 0.0, allvol = 0.0;
      for (int e : mesh.node_elems[i]) {
        const double gmag = egrad[e].norm();
        const double wgt = mesh.volume[e];
        all += gmag * wgt;
        allvol += wgt;
        if (gmag <= 0.0) continue;
        const Vec3 dir = s * egrad[e] / gmag;
        if (dir.dot(mesh.nodes[i] - ecent[e]) > 0.0) {
          up += gmag * wgt;
          upvol += wgt;
        }
      }
      const double G = (upvol > 0.0) ? up / upvol : (allvol > 0.0 ? all / allvol : 1.0);
      wn[i] = w[i] - dtau * s * (G - 1.0);
    }
    w.swap(wn);
  }

  res.phi_d.values = w;
  return res;
}

}  // namespace meltkit
