#include "capscan/geometry/mesh.hpp"

#include <map>
#include <utility>

namespace capscan::geometry {

Aabb TriangleMesh::bounds() const {
  Aabb box;
  for (const auto& v : vertices) box.grow(v);
  return box;
}

std::vector<Vec3> compute_vertex_normals(const std::vector<Vec3>& vertices,
                                         const std::vector<Triangle>& triangles) {
  std::vector<Vec3> acc(vertices.size(), Vec3::Zero());
  for (const auto& t : triangles) {
    // Cross product length is twice the area, so this is area weighting.
    const Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
    for (auto i : t) acc[i] += n;
  }
  for (auto& n : acc) {
    const double len = n.norm();
    n = len > 0.0 ? Vec3(n / len) : kUp;
  }
  return acc;
}

double signed_volume(const TriangleMesh& mesh) {
  double v = 0.0;
  for (const auto& t : mesh.triangles) {
    v += mesh.vertices[t[0]].dot(mesh.vertices[t[1]].cross(mesh.vertices[t[2]]));
  }
  return v / 6.0;
}

bool is_watertight(const TriangleMesh& mesh) {
  // Directed edge -> use count. A closed, consistently oriented surface uses
  // each directed edge once and its reverse once.
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const auto a = t[k];
      const auto b = t[(k + 1) % 3];
      if (a == b) return false;
      if (++directed[{a, b}] > 1) return false;
    }
  }
  for (const auto& [edge, count] : directed) {
    if (!directed.count({edge.second, edge.first})) return false;
  }
  return !mesh.triangles.empty();
}

void validate(const TriangleMesh& mesh) {
  if (mesh.vertices.empty()) throw std::invalid_argument("mesh has zero vertices");
  if (mesh.normals.size() != mesh.vertices.size()) {
    throw std::invalid_argument("normal count does not match vertex count");
  }
  const auto n = mesh.vertices.size();
  for (const auto& t : mesh.triangles) {
    for (auto i : t) {
      if (i >= n) throw std::invalid_argument("triangle index out of range");
    }
  }
  for (const auto& nrm : mesh.normals) {
    if (std::abs(nrm.norm() - 1.0) > 1e-6) throw std::invalid_argument("normal is not unit length");
  }
}

void orient_inward(TriangleMesh& mesh) {
  if (signed_volume(mesh) > 0.0) {
    for (auto& t : mesh.triangles) std::swap(t[1], t[2]);
  }
  // Stored normals keep their smoothing but must agree with the winding.
  const auto reference = compute_vertex_normals(mesh.vertices, mesh.triangles);
  for (std::size_t i = 0; i < mesh.normals.size(); ++i) {
    if (mesh.normals[i].dot(reference[i]) < 0.0) mesh.normals[i] = -mesh.normals[i];
  }
}

TriangleMesh transformed(const TriangleMesh& mesh, const Quat& rotation, const Vec3& translation) {
  TriangleMesh out = mesh;
  const Eigen::Matrix3d r = rotation.normalized().toRotationMatrix();
  for (auto& v : out.vertices) v = r * v + translation;
  for (auto& n : out.normals) n = (r * n).normalized();
  return out;
}

}  // namespace capscan::geometry
