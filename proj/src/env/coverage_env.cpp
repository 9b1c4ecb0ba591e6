#include "capscan/env/coverage_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "capscan/geometry/mesh_io.hpp"
#include "capscan/geometry/phantom.hpp"

namespace capscan::env {

using dynamics::RigidState;

Scene::Scene(geometry::TriangleMesh inward_mesh)
    : mesh(std::move(inward_mesh)), bvh(mesh), bounds(mesh.bounds()) {}

std::shared_ptr<const Scene> make_scene(const PhantomSpec& spec) {
  geometry::TriangleMesh mesh;
  switch (spec.kind) {
    case PhantomKind::sphere: mesh = geometry::generate_sphere_phantom(spec.sphere_vertices, spec.sphere_radius); break;
    case PhantomKind::stomach: mesh = geometry::generate_stomach_phantom(); break;
    case PhantomKind::file: mesh = geometry::load_mesh(spec.path); break;
  }
  geometry::validate(mesh);
  geometry::orient_inward(mesh);
  return std::make_shared<const Scene>(std::move(mesh));
}

ObservationNormalizer::ObservationNormalizer(const Aabb& capsule_box, const Aabb& magnet_box, double speed_cap) {
  offset_.fill(0.0);
  scale_.fill(1.0);
  const Vec3 cc = capsule_box.center();
  const Vec3 ch = 0.5 * capsule_box.extent();
  const Vec3 mc = magnet_box.center();
  const Vec3 mh = 0.5 * magnet_box.extent();
  for (int k = 0; k < 3; ++k) {
    offset_[k] = cc[k];
    scale_[k] = 1.0 / ch[k];
    scale_[7 + k] = 1.0 / speed_cap;
    offset_[10 + k] = mc[k];
    scale_[10 + k] = 1.0 / mh[k];
    scale_[13 + k] = 1.0 / std::numbers::pi;
  }
}

Vec ObservationNormalizer::operator()(const Observation& obs) const {
  Vec out(kObservationSize);
  for (std::size_t i = 0; i < kObservationSize; ++i) out[i] = (obs[i] - offset_[i]) * scale_[i];
  return out;
}

double shaped_reward(const RewardSpec& spec, double diff_coverage) {
  return diff_coverage > spec.diff_threshold ? spec.k * diff_coverage : spec.stall_penalty;
}

CoverageEnv::CoverageEnv(EnvConfig config, std::shared_ptr<const Scene> scene)
    : config_(std::move(config)), scene_(std::move(scene)), tracker_(scene_->mesh.vertex_count()) {
  config_.validate();
  substep_ = config_.substep_params();
  const Aabb& box = scene_->bounds;
  bounds_.capsule_box = box.inflated(config_.capsule_box_inflation);
  const Vec3 c = box.center();
  const double half = 0.5 * config_.magnet_box_size;
  bounds_.magnet_box.lo = Vec3(c.x() - half, box.hi.y() + config_.magnet_box_gap, c.z() - half);
  bounds_.magnet_box.hi = Vec3(c.x() + half, box.hi.y() + config_.magnet_box_gap + config_.magnet_box_size, c.z() + half);
  bounds_.capsule_speed_max = config_.capsule_speed_max;
  bounds_.validate();
  if (!bounds_.magnet_box.contains(magnet_start())) {
    throw std::invalid_argument("magnet start position lies outside the magnet workspace");
  }
  normalizer_ = ObservationNormalizer(bounds_.capsule_box, bounds_.magnet_box, config_.capsule_speed_max);
}

CoverageEnv::CoverageEnv(const EnvConfig& config) : CoverageEnv(config, make_scene(config.phantom)) {}

Vec3 CoverageEnv::magnet_start() const {
  const Aabb& box = scene_->bounds;
  return {box.center().x(), box.hi.y() + config_.magnet_start_height, box.center().z()};
}

bool CoverageEnv::valid_capsule_position(const Vec3& p) const {
  return scene_->bvh.contains(p) && scene_->bvh.closest_point(p).distance >= 0.5 * config_.capsule_length;
}

Observation CoverageEnv::reset(std::uint64_t seed) {
  EpisodeConfig ep;
  ep.seed = seed;
  ep.max_steps = config_.max_steps;
  return reset(ep);
}

Observation CoverageEnv::reset(const EpisodeConfig& episode) {
  if (episode.max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  episode_ = episode;
  tracker_.reset();
  step_ = 0;
  done_ = false;
  started_ = true;

  std::mt19937_64 rng(episode.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Vec3 center = scene_->bounds.center();
  const Vec3 half = 0.5 * config_.spawn_fraction * scene_->bounds.extent();
  capsule_ = RigidState{};
  bool placed = false;
  if (episode.spawn_position) {
    capsule_.position = *episode.spawn_position;
    placed = true;
  } else {
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
      const Vec3 p = center + Vec3(unit(rng), unit(rng), unit(rng)).cwiseProduct(half);
      if (valid_capsule_position(p)) {
        capsule_.position = p;
        placed = true;
      }
    }
  }
  if (!placed) throw std::runtime_error("no valid capsule spawn inside the phantom after 100 attempts");
  const double yaw = episode.spawn_yaw ? *episode.spawn_yaw : std::numbers::pi * unit(rng);
  capsule_.orientation = Quat(Eigen::AngleAxisd(yaw, kUp));

  magnet_ = RigidState{};
  magnet_.position = magnet_start();
  return observe();
}

geometry::CameraPose CoverageEnv::camera_pose() const {
  geometry::CameraPose pose;
  pose.orientation = capsule_.orientation;
  pose.position = capsule_.position + 0.5 * config_.capsule_length * pose.forward();
  return pose;
}

void CoverageEnv::resolve_wall_contact(RigidState& capsule) const {
  const double margin = 0.5 * config_.capsule_length;
  const auto surface = scene_->bvh.closest_point(capsule.position);
  const bool inside = scene_->bvh.contains(capsule.position);
  if (inside && surface.distance >= margin) return;
  const auto& c = scene_->bvh.corners(surface.triangle);
  // Inward winding: the face normal points into the cavity.
  const Vec3 n = (c[1] - c[0]).cross(c[2] - c[0]).normalized();
  capsule.position = surface.point + margin * n;
  const double vn = capsule.linear_velocity.dot(n);
  if (vn < 0.0) capsule.linear_velocity -= vn * n;
}

StepResult CoverageEnv::step(std::span<const double> action) {
  if (!started_) throw ContractError("step() called before reset()");
  if (done_) throw ContractError("step() called on a finished episode; call reset()");
  if (static_cast<int>(action.size()) != action_dim()) {
    throw std::invalid_argument("expected " + std::to_string(action_dim()) + " action components, got " +
                                std::to_string(action.size()));
  }
  std::array<double, 5> a{};
  for (std::size_t i = 0; i < action.size(); ++i) {
    if (!std::isfinite(action[i])) throw std::invalid_argument("action component is not finite");
    a[i] = std::clamp(action[i], -1.0, 1.0);
  }

  // (1) magnet command
  Vec3 velocity_cmd = Vec3::Zero();
  Vec3 angular_cmd = Vec3::Zero();
  if (config_.action_mode == ActionMode::planar) {
    velocity_cmd = config_.magnet_speed_max * Vec3(a[0], 0.0, a[1]);
  } else {
    velocity_cmd = config_.magnet_speed_max * Vec3(a[0], a[1], a[2]);
    angular_cmd = config_.magnet_angular_speed_max * Vec3(a[4], a[3], 0.0);
  }
  magnet_ = dynamics::apply_magnet_command(magnet_, velocity_cmd, angular_cmd, config_.world);

  // (2) capsule dynamics
  for (int s = 0; s < config_.physics_substeps; ++s) {
    const auto wrench = dynamics::dipole_wrench(magnet_, config_.magnet_dipole, capsule_, config_.capsule_dipole);
    capsule_ = dynamics::step_capsule(capsule_, wrench, substep_);
    resolve_wall_contact(capsule_);
  }

  // (3) coverage
  geometry::VisibilityQuery query{config_.camera, camera_pose(), config_.visibility};
  StepResult result;
  result.info.new_vertices = geometry::visible_vertices(query, scene_->mesh, &scene_->bvh, &tracker_.visited());
  result.info.diff_coverage = tracker_.mark_and_diff(result.info.new_vertices);
  result.info.coverage = tracker_.current_coverage();

  // (4) shaped reward, (5) boundary check
  result.reward = shaped_reward(config_.reward, result.info.diff_coverage);
  result.info.violation = dynamics::check_bounds(capsule_, magnet_, bounds_);
  if (result.info.violation != dynamics::Violation::none) {
    result.reward = config_.reward.violation_penalty;
    result.terminated = true;
  }

  // (6) step cap
  ++step_;
  result.truncated = !result.terminated && step_ >= episode_.max_steps;
  done_ = result.terminated || result.truncated;
  result.observation = observe();
  return result;
}

Observation CoverageEnv::observe() const {
  Observation o{};
  const Vec3 ypr = dynamics::yaw_pitch_roll(magnet_.orientation);
  for (int k = 0; k < 3; ++k) {
    o[k] = capsule_.position[k];
    o[7 + k] = capsule_.linear_velocity[k];
    o[10 + k] = magnet_.position[k];
    o[13 + k] = ypr[k];
  }
  o[3] = capsule_.orientation.w();
  o[4] = capsule_.orientation.x();
  o[5] = capsule_.orientation.y();
  o[6] = capsule_.orientation.z();
  o[16] = static_cast<double>(step_) / episode_.max_steps;
  return o;
}

}  // namespace capscan::env
