#pragma once

#include <string_view>

#include "capscan/common/types.hpp"

namespace capscan::dynamics {

struct Wrench;

struct RigidState {
  Vec3 position = Vec3::Zero();                // m
  Quat orientation = Quat::Identity();
  Vec3 linear_velocity = Vec3::Zero();         // m/s
  Vec3 angular_velocity = Vec3::Zero();        // rad/s, world frame

  bool finite() const;
};

struct WorldParams {
  double dt = 0.1;                                    // s
  Vec3 gravity = Vec3(0.0, -9.81, 0.0);               // m/s^2
  double capsule_mass = 0.005;                        // kg
  Vec3 capsule_inertia = Vec3::Zero();                // principal moments, body x/y/z; see default_world()
  double linear_drag = 1.0;                           // N*s/m
  double angular_drag = 8e-6;                         // N*m*s/rad
  double buoyancy_fraction = 0.5;

  // Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

// Solid cylinder along body +Z.
Vec3 cylinder_inertia(double mass, double length, double diameter);

// Capsule defaults: 5 g, 26 mm x 11 mm cylinder.
WorldParams default_world();

// Semi-implicit Euler: velocities first from the total force/torque (magnetic
// wrench, buoyancy-reduced gravity, linear drag on the old velocity), then
// position and orientation from the new velocities.
RigidState step_capsule(const RigidState& capsule, const Wrench& wrench, const WorldParams& params);

// Kinematic update of the robot-held magnet; the commands are applied for
// params.dt with no dynamics.
RigidState apply_magnet_command(const RigidState& magnet, const Vec3& velocity_cmd, const Vec3& angular_cmd,
                                const WorldParams& params);

struct Bounds {
  Aabb capsule_box;
  Aabb magnet_box;
  double capsule_speed_max = 0.05;  // m/s

  void validate() const;
};

enum class Violation { none, capsule_velocity, capsule_position, magnet_position };

std::string_view to_string(Violation v);
Violation violation_from_string(std::string_view s);

// First failed check, in the order: capsule speed, capsule position, magnet
// position.
Violation check_bounds(const RigidState& capsule, const RigidState& magnet, const Bounds& bounds);

// Yaw (about +Y), pitch (about +X), roll (about +Z) for R = Ry(yaw) Rx(pitch) Rz(roll).
Vec3 yaw_pitch_roll(const Quat& q);

double kinetic_energy(const RigidState& s, const WorldParams& params);

}  // namespace capscan::dynamics
