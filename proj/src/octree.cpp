#include "meltkit/octree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace meltkit {

Octree::Octree(const std::vector<Vec3>& points, int leaf_capacity, int max_depth)
    : points_(points), leaf_capacity_(std::max(1, leaf_capacity)),
      max_depth_(std::max(1, max_depth)) {
  if (points_.empty()) throw std::invalid_argument("octree needs at least one point");
  ids_.resize(points_.size());
  std::iota(ids_.begin(), ids_.end(), 0);

  Vec3 lo = points_[0], hi = points_[0];
  for (const auto& p : points_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  // Pad so boundary points are strictly inside the root box.
  const double pad = 1e-12 + 1e-9 * (hi - lo).norm();
  lo.array() -= pad;
  hi.array() += pad;
  nodes_.reserve(2 * points_.size() / leaf_capacity_ + 8);
  build(0, static_cast<int>(ids_.size()), lo, hi, 0);
}

int Octree::build(int first, int count, const Vec3& lo, const Vec3& hi, int level) {
  const int me = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  Node& n0 = nodes_[me];
  n0.lo = lo;
  n0.hi = hi;
  n0.item_lo = lo;
  n0.item_hi = hi;
  std::fill(std::begin(n0.children), std::end(n0.children), -1);
  depth_ = std::max(depth_, level);

  if (count <= leaf_capacity_ || level >= max_depth_) {
    nodes_[me].leaf = true;
    nodes_[me].first = first;
    nodes_[me].count = count;
    return me;
  }

  const Vec3 c = 0.5 * (lo + hi);
  auto octant = [&](int id) {
    const Vec3& p = points_[id];
    return (p[0] >= c[0] ? 1 : 0) | (p[1] >= c[1] ? 2 : 0) | (p[2] >= c[2] ? 4 : 0);
  };
  // Partition ids_[first, first+count) into the 8 octants in place.
  std::array<int, 9> start{};
  {
    std::array<int, 8> cnt{};
    for (int i = first; i < first + count; ++i) cnt[octant(ids_[i])]++;
    start[0] = first;
    for (int o = 0; o < 8; ++o) start[o + 1] = start[o] + cnt[o];
    std::array<int, 8> cursor;
    for (int o = 0; o < 8; ++o) cursor[o] = start[o];
    std::vector<int> tmp(ids_.begin() + first, ids_.begin() + first + count);
    for (int id : tmp) ids_[cursor[octant(id)]++] = id;
  }

  nodes_[me].leaf = false;
  for (int o = 0; o < 8; ++o) {
    const int cnt = start[o + 1] - start[o];
    if (cnt == 0) continue;
    Vec3 clo = lo, chi = hi;
    for (int a = 0; a < 3; ++a) {
      if (o & (1 << a))
        clo[a] = c[a];
      else
        chi[a] = c[a];
    }
    const int child = build(start[o], cnt, clo, chi, level + 1);
    nodes_[me].children[o] = child;
  }
  return me;
}

double Octree::box_dist2(const Node& n, const Vec3& x) {
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double d = std::max({n.lo[a] - x[a], x[a] - n.hi[a], 0.0});
    d2 += d * d;
  }
  return d2;
}

void Octree::nearest_recurse(int node, const Vec3& x, NearestHit& best) const {
  const Node& n = nodes_[node];
  if (n.leaf) {
    for (int i = n.first; i < n.first + n.count; ++i) {
      const int id = ids_[i];
      const double d = (points_[id] - x).squaredNorm();
      if (d < best.distance || (d == best.distance && id < best.index)) {
        best.distance = d;
        best.index = id;
      }
    }
    return;
  }
  // Visit children nearest-box-first; skip boxes strictly farther than best.
  std::array<std::pair<double, int>, 8> order;
  int m = 0;
  for (int c = 0; c < 8; ++c) {
    if (n.children[c] < 0) continue;
    order[m++] = {box_dist2(nodes_[n.children[c]], x), n.children[c]};
  }
  std::sort(order.begin(), order.begin() + m);
  for (int i = 0; i < m; ++i) {
    if (order[i].first > best.distance) break;
    nearest_recurse(order[i].second, x, best);
  }
}

Octree::NearestHit Octree::nearest(const Vec3& x) const {
  NearestHit best;
  best.index = ids_[0];
  best.distance = (points_[best.index] - x).squaredNorm();
  nearest_recurse(0, x, best);
  best.distance = std::sqrt(best.distance);
  return best;
}

std::vector<int> Octree::radius_query(const Vec3& x, double r) const {
  std::vector<int> out;
  const double r2 = r * r;
  std::vector<int> stack = {0};
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    if (box_dist2(n, x) > r2) continue;
    if (n.leaf) {
      for (int i = n.first; i < n.first + n.count; ++i)
        if ((points_[ids_[i]] - x).squaredNorm() <= r2) out.push_back(ids_[i]);
    } else {
      for (int c = 0; c < 8; ++c)
        if (n.children[c] >= 0) stack.push_back(n.children[c]);
    }
  }
  return out;
}

void Octree::set_item_bounds(const std::vector<Vec3>& lo, const std::vector<Vec3>& hi) {
  if (lo.size() != points_.size() || hi.size() != points_.size())
    throw std::invalid_argument("item bounds size mismatch");
  // Leaves first, then parents (children always have larger indices).
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node& n = *it;
    Vec3 blo = Vec3::Constant(std::numeric_limits<double>::max());
    Vec3 bhi = Vec3::Constant(std::numeric_limits<double>::lowest());
    if (n.leaf) {
      for (int i = n.first; i < n.first + n.count; ++i) {
        blo = blo.cwiseMin(lo[ids_[i]]);
        bhi = bhi.cwiseMax(hi[ids_[i]]);
      }
    } else {
      for (int c = 0; c < 8; ++c) {
        if (n.children[c] < 0) continue;
        blo = blo.cwiseMin(nodes_[n.children[c]].item_lo);
        bhi = bhi.cwiseMax(nodes_[n.children[c]].item_hi);
      }
    }
    n.item_lo = blo;
    n.item_hi = bhi;
  }
}

}  // namespace meltkit
