#pragma once

#include "capscan/geometry/mesh.hpp"

namespace capscan::geometry {

inline constexpr std::size_t kStomachVertexCount = 24822;

// Geodesic (class I) subdivision of an icosahedron with frequency f, giving
// 10 f^2 + 2 vertices; f is picked so the count is closest to n_vertices.
// Throws std::invalid_argument when n_vertices < 12.
TriangleMesh generate_sphere_phantom(std::size_t n_vertices, double radius, bool inward_normals = false);

// J-shaped stomach stand-in: a tube swept along a planar cubic centerline with
// a tapering radius, closed by a pole at each end. 170 rings of 146 vertices
// plus two poles gives exactly kStomachVertexCount vertices. Outward winding.
TriangleMesh generate_stomach_phantom();

}  // namespace capscan::geometry
