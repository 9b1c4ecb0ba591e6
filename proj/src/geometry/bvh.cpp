#include "capscan/geometry/bvh.hpp"

#include <algorithm>
#include <cmath>

namespace capscan::geometry {

std::optional<double> intersect_ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b,
                                             const Vec3& c, double t_min, double t_max) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-300) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = origin - a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(q) * inv;
  if (t <= t_min || t >= t_max) return std::nullopt;
  return t;
}

// Region classification from Ericson, Real-Time Collision Detection 5.1.5.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

namespace {

// Slab test; returns the entry parameter or nullopt.
std::optional<double> ray_box(const Aabb& box, const Vec3& origin, const Vec3& inv_dir, double t_min, double t_max) {
  for (int k = 0; k < 3; ++k) {
    double t0 = (box.lo[k] - origin[k]) * inv_dir[k];
    double t1 = (box.hi[k] - origin[k]) * inv_dir[k];
    if (t0 > t1) std::swap(t0, t1);
    // NaN from 0 * inf (origin on a slab plane, axis-parallel ray) keeps the
    // interval unchanged.
    if (t0 > t_min) t_min = t0;
    if (t1 < t_max) t_max = t1;
    if (t_min > t_max) return std::nullopt;
  }
  return t_min;
}

double box_distance_sq(const Aabb& box, const Vec3& p) {
  const Vec3 d = (box.lo - p).cwiseMax(p - box.hi).cwiseMax(0.0);
  return d.squaredNorm();
}

}  // namespace

BvhIndex::BvhIndex(const TriangleMesh& mesh, std::uint32_t max_leaf_size) : max_leaf_(std::max(1u, max_leaf_size)) {
  corners_.reserve(mesh.triangles.size());
  std::vector<Vec3> centroids;
  centroids.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    corners_.push_back({mesh.vertices.at(t[0]), mesh.vertices.at(t[1]), mesh.vertices.at(t[2])});
    centroids.push_back((corners_.back()[0] + corners_.back()[1] + corners_.back()[2]) / 3.0);
  }
  order_.resize(corners_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!order_.empty()) {
    nodes_.reserve(2 * order_.size() / max_leaf_ + 1);
    build(0, static_cast<std::uint32_t>(order_.size()), centroids);
  }
}

std::uint32_t BvhIndex::build(std::uint32_t first, std::uint32_t count, std::vector<Vec3>& centroids) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  Aabb centroid_box;
  for (std::uint32_t i = first; i < first + count; ++i) {
    for (const auto& v : corners_[order_[i]]) box.grow(v);
    centroid_box.grow(centroids[order_[i]]);
  }
  nodes_[index].box = box;
  if (count <= max_leaf_) {
    nodes_[index].first = first;
    nodes_[index].count = count;
    return index;
  }
  int axis = 0;
  centroid_box.extent().maxCoeff(&axis);
  const std::uint32_t mid = first + count / 2;
  std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return centroids[a][axis] < centroids[b][axis] ||
                            (centroids[a][axis] == centroids[b][axis] && a < b);
                   });
  const auto left = build(first, mid - first, centroids);
  const auto right = build(mid, first + count - mid, centroids);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

template <typename Visit>
void BvhIndex::traverse_ray(const Vec3& origin, const Vec3& dir, double t_min, double& t_max, Visit&& visit) const {
  if (nodes_.empty()) return;
  const Vec3 inv_dir = dir.cwiseInverse();
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!ray_box(node.box, origin, inv_dir, t_min, t_max)) continue;
    if (node.leaf()) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        if (!visit(order_[i])) return;
      }
    } else {
      stack[top++] = node.right;
      stack[top++] = node.left;
    }
  }
}

std::optional<RayHit> BvhIndex::nearest_hit(const Vec3& origin, const Vec3& dir, double t_min, double t_max) const {
  std::optional<RayHit> best;
  traverse_ray(origin, dir, t_min, t_max, [&](std::uint32_t tri) {
    const auto& c = corners_[tri];
    if (auto t = intersect_ray_triangle(origin, dir, c[0], c[1], c[2], t_min, t_max)) {
      // Equal-distance ties resolve to the lower triangle id so the answer
      // does not depend on traversal order.
      if (!best || *t < best->t || (*t == best->t && tri < best->triangle)) best = RayHit{*t, tri};
      t_max = std::nextafter(best->t, std::numeric_limits<double>::infinity());
    }
    return true;
  });
  return best;
}

bool BvhIndex::any_hit(const Vec3& origin, const Vec3& dir, double t_min, double t_max) const {
  bool hit = false;
  traverse_ray(origin, dir, t_min, t_max, [&](std::uint32_t tri) {
    const auto& c = corners_[tri];
    hit = intersect_ray_triangle(origin, dir, c[0], c[1], c[2], t_min, t_max).has_value();
    return !hit;
  });
  return hit;
}

std::size_t BvhIndex::count_hits(const Vec3& origin, const Vec3& dir) const {
  std::size_t hits = 0;
  double t_max = std::numeric_limits<double>::infinity();
  traverse_ray(origin, dir, 0.0, t_max, [&](std::uint32_t tri) {
    const auto& c = corners_[tri];
    if (intersect_ray_triangle(origin, dir, c[0], c[1], c[2], 0.0, t_max)) ++hits;
    return true;
  });
  return hits;
}

SurfacePoint BvhIndex::closest_point(const Vec3& p) const {
  SurfacePoint best{p, 0, std::numeric_limits<double>::infinity()};
  if (nodes_.empty()) return best;
  double best_sq = std::numeric_limits<double>::infinity();
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (box_distance_sq(node.box, p) > best_sq) continue;
    if (node.leaf()) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const auto tri = order_[i];
        const auto& c = corners_[tri];
        const Vec3 q = closest_point_on_triangle(p, c[0], c[1], c[2]);
        const double d = (q - p).squaredNorm();
        if (d < best_sq || (d == best_sq && tri < best.triangle)) {
          best_sq = d;
          best = {q, tri, 0.0};
        }
      }
    } else {
      // Visit the nearer child first.
      const double dl = box_distance_sq(nodes_[node.left].box, p);
      const double dr = box_distance_sq(nodes_[node.right].box, p);
      if (dl < dr) {
        stack[top++] = node.right;
        stack[top++] = node.left;
      } else {
        stack[top++] = node.left;
        stack[top++] = node.right;
      }
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

bool BvhIndex::contains(const Vec3& p) const {
  // An irrational-ish direction makes grazing an edge or vertex unlikely.
  const Vec3 dir = Vec3(0.5773502691896258, 0.5780235286, 0.5766771341).normalized();
  return count_hits(p, dir) % 2 == 1;
}

}  // namespace capscan::geometry
