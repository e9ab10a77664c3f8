#pragma once

// Geometry-based level-set re-initialization: intersection ("cloud") points
// of the zero level set with element edges, element-wise triangulation with
// area-weighted point normals, octree-accelerated nearest-point queries, and
// sign-preserving distance restoration. A pseudo-time Eikonal marcher is kept
// as a comparison baseline.

#include "meltkit/levelset.hpp"
#include "meltkit/mesh.hpp"
#include "meltkit/octree.hpp"

namespace meltkit {

struct CloudPoint {
  Vec3 position;
  Vec3 normal = Vec3::Zero();  // area-weighted average of incident triangles
  std::vector<int> incident_triangles;
};

struct InterfaceTriangle {
  int p[3];            // cloud point indices
  double area;
  Vec3 normal;         // unit, oriented metal -> gas
  int source_element;
};

struct InterfaceTriangulation {
  std::vector<CloudPoint> points;
  std::vector<InterfaceTriangle> triangles;

  bool empty() const { return triangles.empty(); }
  double total_area() const;
  std::vector<Vec3> point_positions() const;
};

// Marching-tetrahedra extraction. Nodes with phi exactly 0 are treated as
// +1e-12*h (h = smallest incident element edge) so an element cuts the
// interface in exactly the 3- or 4-point pattern. Triangle normals are
// oriented with -grad(phi) of the source element.
InterfaceTriangulation extract_interface(const Mesh& mesh, const ScalarField& phi);

// Recomputes every cloud-point normal as the area-weighted average of its
// incident triangle normals. Falls back to the largest-area incident triangle
// when the weighted sum cancels.
void average_normals(InterfaceTriangulation& tri);

Octree build_octree(const std::vector<Vec3>& points, int leaf_capacity = 8,
                    int max_depth = 21);

// Step 3 of the geometric re-initialization for a single query point.
Octree::NearestHit nearest_cloud_point(const Octree& tree, const Vec3& x);

enum class RedistanceStatus { Ok, EmptyInterface };

struct RedistanceResult {
  ScalarField phi_d;
  RedistanceStatus status = RedistanceStatus::Ok;
  InterfaceTriangulation tri;  // populated by the geometric variant
  Octree octree;               // octree over the cloud points
};

// Geometric re-initialization: phi_d(x_i) = sign(phi_i) |(x_i - y_m) . n_m|,
// with y_m the nearest cloud point. Never changes a nodal sign. When phi has
// no sign change the input is returned unchanged with EmptyInterface status.
RedistanceResult redistance_geometric(const Mesh& mesh, const ScalarField& phi,
                                      int leaf_capacity = 8);

// Pseudo-time Eikonal marching baseline: explicit first-order upwind updates
// with interface-adjacent nodes anchored to their local linear distance.
// dtau = 0.3 * h_min; the corrected band widens by ~dtau per pseudo-step.
RedistanceResult redistance_pde(const Mesh& mesh, const ScalarField& phi,
                                int n_pseudo_steps);

}  // namespace meltkit
