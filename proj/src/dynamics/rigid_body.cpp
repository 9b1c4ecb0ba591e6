#include "capscan/dynamics/rigid_body.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "capscan/dynamics/magnetics.hpp"

namespace capscan::dynamics {

namespace {

Quat integrate_orientation(const Quat& q, const Vec3& omega, double dt) {
  const double angle = omega.norm() * dt;
  if (angle == 0.0) return q;
  Quat out = Quat(Eigen::AngleAxisd(angle, omega.normalized())) * q;
  out.normalize();
  return out;
}

}  // namespace

bool RigidState::finite() const {
  return position.allFinite() && orientation.coeffs().allFinite() && linear_velocity.allFinite() &&
         angular_velocity.allFinite();
}

void WorldParams::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(capsule_mass > 0.0)) throw std::invalid_argument("capsule mass must be positive");
  if (!(capsule_inertia.array() > 0.0).all()) throw std::invalid_argument("capsule inertia must be positive");
  if (!(linear_drag >= 0.0) || !(angular_drag >= 0.0)) throw std::invalid_argument("drag must be non-negative");
  if (!(buoyancy_fraction >= 0.0 && buoyancy_fraction <= 1.0)) {
    throw std::invalid_argument("buoyancy fraction must lie in [0, 1]");
  }
  if (!gravity.allFinite()) throw std::invalid_argument("gravity must be finite");
}

Vec3 cylinder_inertia(double mass, double length, double diameter) {
  const double r = 0.5 * diameter;
  const double transverse = mass * (3.0 * r * r + length * length) / 12.0;
  return {transverse, transverse, 0.5 * mass * r * r};
}

WorldParams default_world() {
  WorldParams p;
  p.capsule_inertia = cylinder_inertia(p.capsule_mass, 0.026, 0.011);
  return p;
}

RigidState step_capsule(const RigidState& capsule, const Wrench& wrench, const WorldParams& params) {
  RigidState next = capsule;
  const double dt = params.dt;

  const Vec3 force = wrench.force + params.capsule_mass * params.gravity * (1.0 - params.buoyancy_fraction) -
                     params.linear_drag * capsule.linear_velocity;
  next.linear_velocity = capsule.linear_velocity + dt * force / params.capsule_mass;
  next.position = capsule.position + dt * next.linear_velocity;

  const Eigen::Matrix3d rot = capsule.orientation.toRotationMatrix();
  const Eigen::Matrix3d inv_inertia_world =
      rot * params.capsule_inertia.cwiseInverse().asDiagonal() * rot.transpose();
  const Vec3 torque = wrench.torque - params.angular_drag * capsule.angular_velocity;
  next.angular_velocity = capsule.angular_velocity + dt * (inv_inertia_world * torque);
  next.orientation = integrate_orientation(capsule.orientation, next.angular_velocity, dt);
  return next;
}

RigidState apply_magnet_command(const RigidState& magnet, const Vec3& velocity_cmd, const Vec3& angular_cmd,
                                const WorldParams& params) {
  RigidState next = magnet;
  next.linear_velocity = velocity_cmd;
  next.angular_velocity = angular_cmd;
  next.position = magnet.position + velocity_cmd * params.dt;
  next.orientation = integrate_orientation(magnet.orientation, angular_cmd, params.dt);
  return next;
}

void Bounds::validate() const {
  if (!capsule_box.valid() || !magnet_box.valid()) throw std::invalid_argument("bounds boxes must be non-degenerate");
  if (!(capsule_speed_max > 0.0)) throw std::invalid_argument("capsule speed limit must be positive");
}

std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::none: return "none";
    case Violation::capsule_velocity: return "capsule_velocity";
    case Violation::capsule_position: return "capsule_position";
    case Violation::magnet_position: return "magnet_position";
  }
  return "none";
}

Violation violation_from_string(std::string_view s) {
  if (s == "none") return Violation::none;
  if (s == "capsule_velocity") return Violation::capsule_velocity;
  if (s == "capsule_position") return Violation::capsule_position;
  if (s == "magnet_position") return Violation::magnet_position;
  throw std::invalid_argument("unknown violation '" + std::string(s) + "'");
}

Violation check_bounds(const RigidState& capsule, const RigidState& magnet, const Bounds& bounds) {
  if (capsule.linear_velocity.norm() > bounds.capsule_speed_max) return Violation::capsule_velocity;
  if (!bounds.capsule_box.contains(capsule.position)) return Violation::capsule_position;
  if (!bounds.magnet_box.contains(magnet.position)) return Violation::magnet_position;
  return Violation::none;
}

Vec3 yaw_pitch_roll(const Quat& q) {
  const Eigen::Matrix3d r = q.normalized().toRotationMatrix();
  const double pitch = std::asin(std::clamp(-r(1, 2), -1.0, 1.0));
  const double yaw = std::atan2(r(0, 2), r(2, 2));
  const double roll = std::atan2(r(1, 0), r(1, 1));
  return {yaw, pitch, roll};
}

double kinetic_energy(const RigidState& s, const WorldParams& params) {
  const Eigen::Matrix3d rot = s.orientation.toRotationMatrix();
  const Eigen::Matrix3d inertia = rot * params.capsule_inertia.asDiagonal() * rot.transpose();
  return 0.5 * params.capsule_mass * s.linear_velocity.squaredNorm() +
         0.5 * s.angular_velocity.dot(inertia * s.angular_velocity);
}

}  // namespace capscan::dynamics
