#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "capscan/geometry/mesh.hpp"

namespace capscan::geometry {

// Moller-Trumbore, two-sided. Returns the ray parameter of the hit when it
// lies strictly inside (t_min, t_max).
std::optional<double> intersect_ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b,
                                             const Vec3& c, double t_min, double t_max);

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

struct RayHit {
  double t = 0.0;
  std::uint32_t triangle = 0;
};

struct SurfacePoint {
  Vec3 point;
  std::uint32_t triangle = 0;
  double distance = 0.0;
};

// Axis-aligned bounding-box tree over the triangles of a mesh. Immutable once
// built, so one index can serve any number of environments concurrently.
class BvhIndex {
 public:
  struct Node {
    Aabb box;
    // Interior: children at left/right. Leaf: count > 0 triangles starting at
    // `first` in the reordered triangle list.
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t first = 0;
    std::uint32_t count = 0;
    bool leaf() const { return count > 0; }
  };

  explicit BvhIndex(const TriangleMesh& mesh, std::uint32_t max_leaf_size = 4);

  std::optional<RayHit> nearest_hit(const Vec3& origin, const Vec3& dir, double t_min, double t_max) const;
  bool any_hit(const Vec3& origin, const Vec3& dir, double t_min, double t_max) const;
  // Number of surface crossings along the open ray (origin, +inf).
  std::size_t count_hits(const Vec3& origin, const Vec3& dir) const;

  SurfacePoint closest_point(const Vec3& p) const;
  // Ray-parity point-in-mesh test; meaningful for watertight meshes.
  bool contains(const Vec3& p) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  // Triangle ids in leaf order.
  const std::vector<std::uint32_t>& triangle_order() const { return order_; }
  std::size_t triangle_count() const { return order_.size(); }
  const std::array<Vec3, 3>& corners(std::uint32_t triangle) const { return corners_[triangle]; }

 private:
  std::uint32_t build(std::uint32_t first, std::uint32_t count, std::vector<Vec3>& centroids);

  template <typename Visit>
  void traverse_ray(const Vec3& origin, const Vec3& dir, double t_min, double& t_max, Visit&& visit) const;

  std::vector<std::array<Vec3, 3>> corners_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::uint32_t max_leaf_;
};

}  // namespace capscan::geometry
