#pragma once

// Unstructured tetrahedral mesh: storage, ASCII I/O, element metrics and
// iso-parametric helpers shared by every downstream module.
//
// File format (ASCII, '#' starts a comment):
//   line 1:            nnodes nelems
//   next nnodes lines: x y z
//   next nelems lines: n0 n1 n2 n3      (0-based node indices)

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace meltkit {

using Vec3 = Eigen::Vector3d;

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Mesh {
  std::vector<Vec3> nodes;
  std::vector<std::array<int, 4>> elements;

  // Per-element cached metrics, filled by finalize().
  std::vector<double> volume;        // signed volume, positive by invariant
  std::vector<double> h_min;         // minimum of the 6 edge lengths
  // Constant shape-function gradients, 4 per element.
  std::vector<std::array<Vec3, 4>> grad_N;
  std::vector<std::vector<int>> node_elems;  // incident elements per node

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_elements() const { return static_cast<int>(elements.size()); }

  // Validates indices/orientation and caches volumes, gradients, adjacency.
  // Throws MeshError on out-of-range indices, duplicate nodes within an
  // element, or non-positive signed volume.
  void finalize();

  Vec3 centroid(int e) const;
  double min_h() const;  // min over elements of h_min
};

Mesh load_mesh(const std::string& path);
void save_mesh(const Mesh& mesh, const std::string& path);

// Signed volume of the tet (a,b,c,d); positive for right-handed orientation.
double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

// Minimum of the 6 edge lengths of element `elem`.
double min_edge_length(const Mesh& mesh, int elem);

// Parameter t in [0,1] with phi_a + t (phi_b - phi_a) = 0. Requires a strict
// sign change; throws std::invalid_argument otherwise.
double edge_zero_crossing(double phi_a, double phi_b);

// Nodal scalar field bound to a mesh (length == node count).
struct ScalarField {
  const Mesh* mesh = nullptr;
  Eigen::VectorXd values;

  ScalarField() = default;
  explicit ScalarField(const Mesh& m, double init = 0.0)
      : mesh(&m), values(Eigen::VectorXd::Constant(m.num_nodes(), init)) {}
  double& operator[](int i) { return values[i]; }
  double operator[](int i) const { return values[i]; }
};

// Nodal 3-vector field, stored node-major (x0,y0,z0,x1,...).
struct VectorField {
  const Mesh* mesh = nullptr;
  Eigen::VectorXd values;

  VectorField() = default;
  explicit VectorField(const Mesh& m)
      : mesh(&m), values(Eigen::VectorXd::Zero(3 * m.num_nodes())) {}
  Eigen::Map<Vec3> at(int i) { return Eigen::Map<Vec3>(values.data() + 3 * i); }
  Eigen::Map<const Vec3> at(int i) const {
    return Eigen::Map<const Vec3>(values.data() + 3 * i);
  }
};

// Element-constant gradient of a nodal scalar field.
Vec3 element_gradient(const Mesh& mesh, int e, const Eigen::VectorXd& nodal);

}  // namespace meltkit
