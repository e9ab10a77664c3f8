#include "meltkit/mesh.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace meltkit {

double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

void Mesh::finalize() {
  const int nn = num_nodes();
  const int ne = num_elements();
  volume.assign(ne, 0.0);
  h_min.assign(ne, 0.0);
  grad_N.assign(ne, {});
  node_elems.assign(nn, {});

  for (int e = 0; e < ne; ++e) {
    const auto& el = elements[e];
    for (int a = 0; a < 4; ++a) {
      if (el[a] < 0 || el[a] >= nn)
        throw MeshError("element " + std::to_string(e) + " references node " +
                        std::to_string(el[a]) + " of " + std::to_string(nn));
      for (int b = a + 1; b < 4; ++b)
        if (el[a] == el[b])
          throw MeshError("element " + std::to_string(e) + " repeats node " +
                          std::to_string(el[a]));
    }
    const Vec3& x0 = nodes[el[0]];
    const Vec3& x1 = nodes[el[1]];
    const Vec3& x2 = nodes[el[2]];
    const Vec3& x3 = nodes[el[3]];
    const double v = tet_signed_volume(x0, x1, x2, x3);
    if (!(v > 0.0))
      throw MeshError("element " + std::to_string(e) +
                      " has non-positive signed volume " + std::to_string(v));
    volume[e] = v;

    // grad N_a = (opposite face normal) / (3 V); computed from the inverse
    // of the edge matrix. For linear tets these are element constants.
    Eigen::Matrix3d J;
    J.col(0) = x1 - x0;
    J.col(1) = x2 - x0;
    J.col(2) = x3 - x0;
    Eigen::Matrix3d Jinv = J.inverse();
    Vec3 g1 = Jinv.row(0), g2 = Jinv.row(1), g3 = Jinv.row(2);
    grad_N[e] = {Vec3(-g1 - g2 - g3), g1, g2, g3};

    double hmin = std::numeric_limits<double>::max();
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        hmin = std::min(hmin, (nodes[el[a]] - nodes[el[b]]).norm());
    h_min[e] = hmin;

    for (int a = 0; a < 4; ++a) node_elems[el[a]].push_back(e);
  }
}

Vec3 Mesh::centroid(int e) const {
  const auto& el = elements[e];
  return (nodes[el[0]] + nodes[el[1]] + nodes[el[2]] + nodes[el[3]]) / 4.0;
}

double Mesh::min_h() const {
  double h = std::numeric_limits<double>::max();
  for (double v : h_min) h = std::min(h, v);
  return h;
}

namespace {

// Strips comments, returns false on pure-comment/blank lines.
bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    auto pos = line.find('#');
    if (pos != std::string::npos) line.erase(pos);
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) return true;
  }
  return false;
}

}  // namespace

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file: " + path);

  std::string line;
  if (!next_data_line(in, line)) throw MeshError("empty mesh file: " + path);
  std::istringstream head(line);
  long long nn = -1, ne = -1;
  if (!(head >> nn >> ne) || nn < 0 || ne < 0)
    throw MeshError("malformed header line: '" + line + "'");

  Mesh mesh;
  mesh.nodes.reserve(nn);
  for (long long i = 0; i < nn; ++i) {
    if (!next_data_line(in, line))
      throw MeshError("unexpected end of file in node block");
    std::istringstream ls(line);
    Vec3 x;
    if (!(ls >> x[0] >> x[1] >> x[2]))
      throw MeshError("malformed node line: '" + line + "'");
    mesh.nodes.push_back(x);
  }
  mesh.elements.reserve(ne);
  for (long long i = 0; i < ne; ++i) {
    if (!next_data_line(in, line))
      throw MeshError("unexpected end of file in element block");
    std::istringstream ls(line);
    std::array<int, 4> el{};
    if (!(ls >> el[0] >> el[1] >> el[2] >> el[3]))
      throw MeshError("malformed element line: '" + line + "'");
    mesh.elements.push_back(el);
  }
  mesh.finalize();
  return mesh;
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open for writing: " + path);
  out.precision(17);
  out << mesh.num_nodes() << " " << mesh.num_elements() << "\n";
  for (const auto& x : mesh.nodes)
    out << x[0] << " " << x[1] << " " << x[2] << "\n";
  for (const auto& el : mesh.elements)
    out << el[0] << " " << el[1] << " " << el[2] << " " << el[3] << "\n";
}

double min_edge_length(const Mesh& mesh, int elem) {
  if (elem < 0 || elem >= mesh.num_elements())
    throw std::out_of_range("element index " + std::to_string(elem));
  return mesh.h_min[elem];
}

double edge_zero_crossing(double phi_a, double phi_b) {
  if (!(phi_a * phi_b < 0.0))
    throw std::invalid_argument("edge_zero_crossing requires a strict sign change");
  return phi_a / (phi_a - phi_b);
}

Vec3 element_gradient(const Mesh& mesh, int e, const Eigen::VectorXd& nodal) {
  const auto& el = mesh.elements[e];
  const auto& G = mesh.grad_N[e];
  Vec3 g = Vec3::Zero();
  for (int a = 0; a < 4; ++a) g += nodal[el[a]] * G[a];
  return g;
}

}  // namespace meltkit
