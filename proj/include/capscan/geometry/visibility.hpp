#pragma once

#include <cstdint>
#include <vector>

#include "capscan/geometry/bvh.hpp"
#include "capscan/geometry/mesh.hpp"

namespace capscan::geometry {

struct CameraModel {
  double fov_deg = 110.0;  // full cone angle
  double near = 0.001;
  double far = 0.2;

  // Throws std::invalid_argument unless 0 < fov < 180 and 0 < near < far.
  void validate() const;
};

// The camera looks along the body +Z axis of `orientation`.
struct CameraPose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  Vec3 forward() const { return orientation * Vec3::UnitZ(); }
};

enum class VisibilityMode { frustum_only, occlusion };

// Distance along the ray, before the vertex, inside which hits are ignored so
// that a vertex is not hidden by its own incident triangles.
inline constexpr double kOcclusionEpsilon = 1e-5;

// In-cone, in-depth-range and front-facing test for a single vertex.
bool in_view(const CameraModel& camera, const CameraPose& pose, const Vec3& vertex, const Vec3& normal);

struct VisibilityQuery {
  CameraModel camera;
  CameraPose pose;
  VisibilityMode mode = VisibilityMode::occlusion;
  double occlusion_epsilon = kOcclusionEpsilon;
};

// Indices of visible vertices in ascending order. `skip`, when given, marks
// vertices the caller does not need (already visited ones); they are never
// tested or returned. `bvh` may be null in frustum-only mode.
std::vector<std::uint32_t> visible_vertices(const VisibilityQuery& query, const TriangleMesh& mesh,
                                            const BvhIndex* bvh, const std::vector<bool>* skip = nullptr);

}  // namespace capscan::geometry
