#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "capscan/env/env_config.hpp"
#include "capscan/geometry/bvh.hpp"
#include "capscan/geometry/coverage.hpp"
#include "capscan/geometry/mesh.hpp"

namespace capscan::env {

// Phantom mesh (normals facing the cavity) and its BVH. Immutable; shared by
// every environment built from the same phantom.
struct Scene {
  geometry::TriangleMesh mesh;
  geometry::BvhIndex bvh;
  Aabb bounds;

  explicit Scene(geometry::TriangleMesh inward_mesh);
};

std::shared_ptr<const Scene> make_scene(const PhantomSpec& spec);

inline constexpr std::size_t kObservationSize = 17;

// Layout: capsule position (0-2), capsule orientation w,x,y,z (3-6), capsule
// velocity (7-9), magnet position (10-12), magnet yaw/pitch/roll (13-15),
// episode progress step/max_steps (16). Physical units, not normalized.
using Observation = std::array<double, kObservationSize>;

struct EpisodeConfig {
  int max_steps = 1500;
  std::uint64_t seed = 0;
  // Overrides for the random capsule spawn.
  std::optional<Vec3> spawn_position;
  std::optional<double> spawn_yaw;
};

struct StepInfo {
  double coverage = 0.0;       // percent
  double diff_coverage = 0.0;  // percentage points gained this step
  std::vector<std::uint32_t> new_vertices;
  dynamics::Violation violation = dynamics::Violation::none;
};

struct StepResult {
  Observation observation{};
  double reward = 0.0;
  bool terminated = false;  // boundary violation
  bool truncated = false;   // step cap reached
  StepInfo info;
};

// Affine map applied at the policy boundary: positions relative to their box
// center over half-extent, velocity over the speed cap, angles over pi.
class ObservationNormalizer {
 public:
  ObservationNormalizer() = default;
  ObservationNormalizer(const Aabb& capsule_box, const Aabb& magnet_box, double speed_cap);
  Vec operator()(const Observation& obs) const;

 private:
  std::array<double, kObservationSize> offset_{};
  std::array<double, kObservationSize> scale_{};
};

// Reward for a step without a boundary violation.
double shaped_reward(const RewardSpec& spec, double diff_coverage);

// Episodic magnet-actuated coverage MDP. One instance is strictly sequential;
// separate instances may run on separate threads and share the Scene.
class CoverageEnv {
 public:
  CoverageEnv(EnvConfig config, std::shared_ptr<const Scene> scene);
  explicit CoverageEnv(const EnvConfig& config);

  // Clears coverage, spawns the capsule (seeded), centers the magnet. The
  // spawn view is not counted toward coverage. Throws std::runtime_error if
  // no valid spawn is found in 100 draws.
  Observation reset(const EpisodeConfig& episode);
  Observation reset(std::uint64_t seed);

  // Actions are clamped to [-1, 1]. Throws ContractError when the episode has
  // already ended or before the first reset, std::invalid_argument on a
  // wrong-sized or non-finite action.
  StepResult step(std::span<const double> action);

  Observation observe() const;

  const EnvConfig& config() const { return config_; }
  const Scene& scene() const { return *scene_; }
  std::shared_ptr<const Scene> shared_scene() const { return scene_; }
  const dynamics::Bounds& bounds() const { return bounds_; }
  const geometry::CoverageTracker& tracker() const { return tracker_; }
  const dynamics::RigidState& capsule() const { return capsule_; }
  const dynamics::RigidState& magnet() const { return magnet_; }
  int step_count() const { return step_; }
  int max_steps() const { return episode_.max_steps; }
  double sim_time() const { return step_ * config_.world.dt; }
  bool done() const { return done_; }
  int action_dim() const { return config_.action_dim(); }
  const ObservationNormalizer& normalizer() const { return normalizer_; }
  geometry::CameraPose camera_pose() const;
  Vec3 magnet_start() const;

 private:
  void resolve_wall_contact(dynamics::RigidState& capsule) const;
  bool valid_capsule_position(const Vec3& p) const;

  EnvConfig config_;
  std::shared_ptr<const Scene> scene_;
  dynamics::WorldParams substep_;
  dynamics::Bounds bounds_;
  ObservationNormalizer normalizer_;
  geometry::CoverageTracker tracker_;
  EpisodeConfig episode_;
  dynamics::RigidState capsule_;
  dynamics::RigidState magnet_;
  int step_ = 0;
  bool started_ = false;
  bool done_ = false;
};

}  // namespace capscan::env
