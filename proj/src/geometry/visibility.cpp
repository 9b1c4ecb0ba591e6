#include "capscan/geometry/visibility.hpp"

#include <cmath>
#include <numbers>

namespace capscan::geometry {

void CameraModel::validate() const {
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw std::invalid_argument("camera fov must lie in (0, 180) degrees");
  if (!(near > 0.0 && near < far)) throw std::invalid_argument("camera requires 0 < near < far");
}

bool in_view(const CameraModel& camera, const CameraPose& pose, const Vec3& vertex, const Vec3& normal) {
  const Vec3 to_vertex = vertex - pose.position;
  const Vec3 fwd = pose.forward();
  const double depth = to_vertex.dot(fwd);
  if (depth < camera.near || depth > camera.far) return false;
  const double dist = to_vertex.norm();
  const double cos_half = std::cos(0.5 * camera.fov_deg * std::numbers::pi / 180.0);
  if (depth < cos_half * dist) return false;
  return normal.dot(-to_vertex) > 0.0;
}

std::vector<std::uint32_t> visible_vertices(const VisibilityQuery& query, const TriangleMesh& mesh,
                                            const BvhIndex* bvh, const std::vector<bool>* skip) {
  if (query.mode == VisibilityMode::occlusion && bvh == nullptr) {
    throw std::invalid_argument("occlusion visibility needs a BVH");
  }
  std::vector<std::uint32_t> out;
  const auto n = static_cast<std::uint32_t>(mesh.vertices.size());
  for (std::uint32_t i = 0; i < n; ++i) {
    if (skip && (*skip)[i]) continue;
    const Vec3& v = mesh.vertices[i];
    if (!in_view(query.camera, query.pose, v, mesh.normals[i])) continue;
    if (query.mode == VisibilityMode::occlusion) {
      const Vec3 d = v - query.pose.position;
      const double dist = d.norm();
      if (bvh->any_hit(query.pose.position, d / dist, 0.0, dist - query.occlusion_epsilon)) continue;
    }
    out.push_back(i);
  }
  return out;
}

}  // namespace capscan::geometry
