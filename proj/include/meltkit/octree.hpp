#pragma once

// Octree over 3D points with pruned nearest-point traversal, radius queries,
// and optional per-item bounding boxes for ray-intersection walks.
// Immutable after build; all queries are safe for concurrent use.

#include <vector>

#include "meltkit/mesh.hpp"

namespace meltkit {

class Octree {
 public:
  struct Node {
    Vec3 lo, hi;          // geometric box (children partition the parent)
    Vec3 item_lo, item_hi;  // loose box enclosing item bounds in the subtree
    int children[8];      // -1 when leaf
    int first = 0, count = 0;  // leaf: range into ids_
    bool leaf = true;
  };

  struct NearestHit {
    int index = -1;
    double distance = 0.0;
  };

  Octree() = default;
  Octree(const std::vector<Vec3>& points, int leaf_capacity = 8, int max_depth = 21);

  // Exact nearest point (argmin of Euclidean distance, ties -> lowest index).
  NearestHit nearest(const Vec3& x) const;

  // Indices of all points within distance r of x (unsorted).
  std::vector<int> radius_query(const Vec3& x, double r) const;

  // Attach an AABB per item (e.g. the triangle a centroid stands for) and
  // propagate loose boxes up the tree; enables visit_ray().
  void set_item_bounds(const std::vector<Vec3>& lo, const std::vector<Vec3>& hi);

  // Calls visit(item_index) for every item whose loose leaf box the ray
  // (origin + t*dir, t >= 0) passes through.
  template <class Visitor>
  void visit_ray(const Vec3& origin, const Vec3& dir, Visitor&& visit) const;

  bool empty() const { return points_.empty(); }
  int size() const { return static_cast<int>(points_.size()); }
  int depth() const { return depth_; }
  const std::vector<Node>& tree_nodes() const { return nodes_; }
  const std::vector<int>& leaf_ids() const { return ids_; }
  const Vec3& point(int i) const { return points_[i]; }

 private:
  int build(int first, int count, const Vec3& lo, const Vec3& hi, int level);
  static double box_dist2(const Node& n, const Vec3& x);
  void nearest_recurse(int node, const Vec3& x, NearestHit& best) const;

  std::vector<Vec3> points_;
  std::vector<int> ids_;  // point indices grouped by leaf
  std::vector<Node> nodes_;
  int leaf_capacity_ = 8;
  int max_depth_ = 21;
  int depth_ = 0;
};

template <class Visitor>
void Octree::visit_ray(const Vec3& origin, const Vec3& dir, Visitor&& visit) const {
  if (nodes_.empty()) return;
  // Slab test against the loose boxes, iterative stack walk.
  std::vector<int> stack = {0};
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    bool hit = true;
    for (int a = 0; a < 3 && hit; ++a) {
      if (std::abs(dir[a]) < 1e-300) {
        if (origin[a] < n.item_lo[a] || origin[a] > n.item_hi[a]) hit = false;
      } else {
        double ta = (n.item_lo[a] - origin[a]) / dir[a];
        double tb = (n.item_hi[a] - origin[a]) / dir[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) hit = false;
      }
    }
    if (!hit) continue;
    if (n.leaf) {
      for (int i = n.first; i < n.first + n.count; ++i) visit(ids_[i]);
    } else {
      for (int c = 0; c < 8; ++c)
        if (n.children[c] >= 0) stack.push_back(n.children[c]);
    }
  }
}

}  // namespace meltkit
