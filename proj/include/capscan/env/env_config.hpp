#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "capscan/common/config.hpp"
#include "capscan/dynamics/magnetics.hpp"
#include "capscan/dynamics/rigid_body.hpp"
#include "capscan/geometry/visibility.hpp"
#include "json.hpp"

namespace capscan::env {

enum class PhantomKind { sphere, stomach, file };

struct PhantomSpec {
  PhantomKind kind = PhantomKind::sphere;
  std::size_t sphere_vertices = 2000;
  double sphere_radius = 0.05;
  std::string path;  // PhantomKind::file
};

// Reward shaping: k * r when the coverage gain r (percentage points) exceeds
// the threshold, the stall penalty otherwise, and the violation penalty on a
// boundary violation.
struct RewardSpec {
  double k = 0.1;
  double diff_threshold = 0.02;
  double stall_penalty = -0.01;
  double violation_penalty = -0.1;

  void validate() const;
};

// planar: 2 actions, magnet velocity along world x and z.
// extended: 5 actions, magnet velocity x/y/z plus yaw and pitch rates.
enum class ActionMode { planar, extended };

struct EnvConfig {
  PhantomSpec phantom;
  geometry::CameraModel camera;
  geometry::VisibilityMode visibility = geometry::VisibilityMode::occlusion;
  dynamics::WorldParams world = dynamics::default_world();
  int physics_substeps = 40;

  double capsule_length = 0.026;
  double capsule_diameter = 0.011;
  dynamics::DipoleSpec capsule_dipole{0.02, Vec3::UnitZ()};
  dynamics::DipoleSpec magnet_dipole{50.0, -Vec3::UnitY()};  // pointing down at the patient

  // Bounds: capsule box is the phantom box inflated by this fraction; the
  // magnet box is a cube of the given edge sitting `magnet_box_gap` above the
  // phantom top, centered horizontally on the phantom.
  double capsule_box_inflation = 0.1;
  double magnet_box_size = 0.3;
  double magnet_box_gap = 0.01;
  double capsule_speed_max = 0.05;

  // The magnet starts horizontally centered, this far above the phantom top.
  double magnet_start_height = 0.04;
  double magnet_speed_max = 0.05;         // m/s
  double magnet_angular_speed_max = 0.5;  // rad/s, extended mode only

  // Capsule spawn: uniform in the phantom box shrunk to this fraction about
  // its center, random yaw.
  double spawn_fraction = 0.3;

  RewardSpec reward;
  ActionMode action_mode = ActionMode::planar;
  int max_steps = 1500;

  int action_dim() const { return action_mode == ActionMode::planar ? 2 : 5; }
  dynamics::WorldParams substep_params() const;
  void validate() const;
};

nlohmann::json to_json(const EnvConfig& cfg);
EnvConfig env_config_from_json(const nlohmann::json& j);

// Overlays the [env], [phantom], [camera], [world], [capsule], [magnet],
// [bounds] and [reward] sections of a key/value config onto `base`.
EnvConfig env_config_from(const KeyValueConfig& kv, EnvConfig base = {});
// Every field, in the form env_config_from reads back.
KeyValueConfig to_kv(const EnvConfig& cfg);

std::string to_string(PhantomKind k);
std::string to_string(geometry::VisibilityMode m);
std::string to_string(ActionMode m);

}  // namespace capscan::env
