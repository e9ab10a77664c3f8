#include "meltkit/structured.hpp"

#include <stdexcept>

namespace meltkit {

namespace {

// Kuhn split of the unit cube into 6 tets around the (0,0,0)-(1,1,1) diagonal.
// Corner ordering: bit0 -> x, bit1 -> y, bit2 -> z.
constexpr int kCubeTets[6][4] = {
    {0, 1, 3, 7}, {0, 3, 2, 7}, {0, 2, 6, 7},
    {0, 6, 4, 7}, {0, 4, 5, 7}, {0, 5, 1, 7},
};

}  // namespace

Mesh make_box_mesh(int nx, int ny, int nz, const Vec3& lo, const Vec3& hi) {
  if (nx < 1 || ny < 1 || nz < 1) throw std::invalid_argument("box mesh needs >=1 cell per axis");
  Mesh mesh;
  const int px = nx + 1, py = ny + 1, pz = nz + 1;
  auto nid = [&](int i, int j, int k) { return (k * py + j) * px + i; };
  mesh.nodes.reserve(static_cast<size_t>(px) * py * pz);
  for (int k = 0; k < pz; ++k)
    for (int j = 0; j < py; ++j)
      for (int i = 0; i < px; ++i)
        mesh.nodes.emplace_back(lo[0] + (hi[0] - lo[0]) * i / nx,
                                lo[1] + (hi[1] - lo[1]) * j / ny,
                                lo[2] + (hi[2] - lo[2]) * k / nz);
  mesh.elements.reserve(static_cast<size_t>(nx) * ny * nz * 6);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        int corner[8];
        for (int c = 0; c < 8; ++c)
          corner[c] = nid(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
        for (const auto& t : kCubeTets) {
          std::array<int, 4> el = {corner[t[0]], corner[t[1]], corner[t[2]], corner[t[3]]};
          if (tet_signed_volume(mesh.nodes[el[0]], mesh.nodes[el[1]],
                                mesh.nodes[el[2]], mesh.nodes[el[3]]) < 0)
            std::swap(el[2], el[3]);
          mesh.elements.push_back(el);
        }
      }
  mesh.finalize();
  return mesh;
}

Mesh make_mirrored_box_mesh(int nx, int ny, int nz, const Vec3& lo, const Vec3& hi) {
  if (nz % 2 != 0) throw std::invalid_argument("mirrored box mesh needs even nz");
  const double zmid = 0.5 * (lo[2] + hi[2]);
  Mesh half = make_box_mesh(nx, ny, nz / 2, lo, Vec3(hi[0], hi[1], zmid));

  Mesh mesh;
  mesh.nodes = half.nodes;
  const int n_half = half.num_nodes();
  // Mirror nodes above the mid-plane; nodes on the plane are shared.
  std::vector<int> mirror(n_half, -1);
  for (int i = 0; i < n_half; ++i) {
    const Vec3& x = half.nodes[i];
    if (std::abs(x[2] - zmid) < 1e-14 * (1.0 + std::abs(zmid))) {
      mirror[i] = i;
    } else {
      mirror[i] = mesh.num_nodes();
      mesh.nodes.emplace_back(x[0], x[1], 2.0 * zmid - x[2]);
    }
  }
  mesh.elements = half.elements;
  for (const auto& el : half.elements) {
    std::array<int, 4> m = {mirror[el[0]], mirror[el[1]], mirror[el[2]], mirror[el[3]]};
    std::swap(m[2], m[3]);  // reflection flips orientation
    mesh.elements.push_back(m);
  }
  mesh.finalize();
  return mesh;
}

}  // namespace meltkit
