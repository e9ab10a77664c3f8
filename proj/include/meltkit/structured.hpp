#pragma once

// Structured box grids split into tetrahedra, used by the benchmark presets
// and the test suites. Not a general mesh generator.

#include "meltkit/mesh.hpp"

namespace meltkit {

// nx,ny,nz cells over [lo,hi], each cell split into 6 tets (Kuhn split).
// Minimum tet edge equals the smallest cell spacing.
Mesh make_box_mesh(int nx, int ny, int nz, const Vec3& lo, const Vec3& hi);

// Box mesh whose tetrahedralization is mirror-symmetric about the mid-plane
// z = (lo.z + hi.z)/2. nz must be even. Quadrature-point symmetry makes
// antisymmetric integrands cancel exactly, which some conservation tests rely
// on.
Mesh make_mirrored_box_mesh(int nx, int ny, int nz, const Vec3& lo, const Vec3& hi);

}  // namespace meltkit
