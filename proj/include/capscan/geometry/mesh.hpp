#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "capscan/common/types.hpp"

namespace capscan::geometry {

using Triangle = std::array<std::uint32_t, 3>;

// Vertex positions are in meters. Normals are unit length, one per vertex.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Vec3> normals;
  std::vector<Triangle> triangles;

  std::size_t vertex_count() const { return vertices.size(); }
  Aabb bounds() const;
};

// Area-weighted average of incident face normals (counter-clockwise winding is
// front). Vertices with no incident area get +Y.
std::vector<Vec3> compute_vertex_normals(const std::vector<Vec3>& vertices,
                                         const std::vector<Triangle>& triangles);

// Signed enclosed volume; positive when the winding faces outward.
double signed_volume(const TriangleMesh& mesh);

// Every undirected edge used by exactly two triangles, with opposite
// orientation in the two.
bool is_watertight(const TriangleMesh& mesh);

// Throws std::invalid_argument on out-of-range indices, non-unit normals or a
// normal/vertex count mismatch.
void validate(const TriangleMesh& mesh);

// Reverses triangle winding and negates normals when the surface winding faces
// outward, so that normals point into the enclosed cavity.
void orient_inward(TriangleMesh& mesh);

// Applies x -> R x + t to vertices and R to normals.
TriangleMesh transformed(const TriangleMesh& mesh, const Quat& rotation, const Vec3& translation);

}  // namespace capscan::geometry
