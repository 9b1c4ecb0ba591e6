#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "capscan/dynamics/magnetics.hpp"
#include "capscan/dynamics/rigid_body.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace capscan;
using namespace capscan::dynamics;

namespace {

double rel_err(const Vec3& a, const Vec3& b) { return (a - b).norm() / std::max(a.norm(), b.norm()); }

WorldParams free_space() {
  auto p = default_world();
  p.gravity.setZero();
  p.linear_drag = 0.0;
  p.angular_drag = 0.0;
  return p;
}

}  // namespace

TEST_CASE("dipole field: zero moment, 1/r^3 scaling, on-axis value") {
  CHECK(dipole_field(Vec3::Zero(), Vec3(0.1, 0.2, 0.3)).norm() == 0.0);

  const Vec3 m(0.3, -1.2, 4.0);
  const Vec3 r(0.02, 0.05, -0.03);
  const double ratio = dipole_field(m, 2.0 * r).norm() / dipole_field(m, r).norm();
  CHECK(ratio == doctest::Approx(1.0 / 8.0).epsilon(1e-14));

  // On-axis field of a dipole: mu0 m / (2 pi d^3) along the axis.
  const double mag = 50.0;
  const double d = 0.08;
  const Vec3 b = dipole_field(Vec3(0, 0, mag), Vec3(0, 0, d));
  const double expected = 4e-7 * std::numbers::pi * mag / (2.0 * std::numbers::pi * d * d * d);
  CHECK(b.x() == 0.0);
  CHECK(b.y() == 0.0);
  CHECK(b.z() == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("dipole field singularity") {
  CHECK_THROWS_AS(dipole_field(Vec3::UnitZ(), Vec3(0, 0, 1e-7)), SingularityError);
  CHECK_THROWS_AS(dipole_field_jacobian(Vec3::UnitZ(), Vec3::Zero()), SingularityError);
  RigidState a, b;
  CHECK_THROWS_AS(dipole_wrench(a, DipoleSpec{}, b, DipoleSpec{}), SingularityError);
}

TEST_CASE("anti-parallel coaxial dipoles repel with 3 mu0 m1 m2 / (2 pi d^4)") {
  const double m1 = 50.0, m2 = 0.02, d = 0.07;
  const double expected = 3.0 * kMu0 * m1 * m2 / (2.0 * std::numbers::pi * std::pow(d, 4));
  for (auto method : {ForceMethod::closed_form, ForceMethod::finite_difference}) {
    const auto w = dipole_wrench(Vec3(0, m1, 0), Vec3::Zero(), Vec3(0, -m2, 0), Vec3(0, d, 0), method);
    CHECK(w.force.y() > 0.0);  // pushed away from the source
    CHECK(std::abs(w.force.norm() - expected) / expected < 1e-8);
    CHECK(w.torque.norm() == 0.0);
  }
}

TEST_CASE("capsule moment parallel to the local field feels no torque") {
  const Vec3 src(0.0, 0.0, 50.0);
  const Vec3 pos(0.03, -0.02, 0.09);
  const Vec3 b = dipole_field(src, pos);
  const auto w = dipole_wrench(src, Vec3::Zero(), 0.02 * b.normalized(), pos);
  CHECK(w.torque.norm() < 1e-18);
}

TEST_CASE("force pairs cancel and closed form agrees with finite differences") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> sep(0.03, 0.3);
  double worst_pair = 0.0, worst_fd = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 m1 = 50.0 * (testing::random_rotation(rng) * Vec3::UnitZ());
    const Vec3 m2 = 0.02 * (testing::random_rotation(rng) * Vec3::UnitZ());
    const Vec3 p1 = testing::random_in_ball(rng, 0.2);
    const Vec3 p2 = p1 + sep(rng) * (testing::random_rotation(rng) * Vec3::UnitX());
    const auto on2 = dipole_wrench(m1, p1, m2, p2);
    const auto on1 = dipole_wrench(m2, p2, m1, p1);
    worst_pair = std::max(worst_pair, (on1.force + on2.force).norm() / on2.force.norm());
    const auto fd = dipole_wrench(m1, p1, m2, p2, ForceMethod::finite_difference);
    worst_fd = std::max(worst_fd, rel_err(fd.force, on2.force));
  }
  CHECK(worst_pair <= 1e-9);
  CHECK(worst_fd <= 1e-8);
}

TEST_CASE("field falls as r^-3 and force as r^-4 on a log-log fit") {
  std::mt19937_64 rng(3);
  const Vec3 m1 = 50.0 * (testing::random_rotation(rng) * Vec3::UnitZ());
  const Vec3 m2 = 0.02 * (testing::random_rotation(rng) * Vec3::UnitZ());
  const Vec3 dir = (testing::random_rotation(rng) * Vec3::UnitX());
  double sx = 0, sy = 0, sf = 0, sxx = 0, sxy = 0, sxf = 0;
  const int n = 50;
  for (int i = 0; i < n; ++i) {
    const double r = 0.02 * std::pow(10.0, 1.5 * i / (n - 1));
    const double x = std::log(r);
    const double y = std::log(dipole_field(m1, r * dir).norm());
    const double f = std::log(dipole_wrench(m1, Vec3::Zero(), m2, r * dir).force.norm());
    sx += x, sy += y, sf += f, sxx += x * x, sxy += x * y, sxf += x * f;
  }
  const double denom = n * sxx - sx * sx;
  CHECK(std::abs((n * sxy - sx * sy) / denom + 3.0) < 1e-3);
  CHECK(std::abs((n * sxf - sx * sf) / denom + 4.0) < 1e-3);
}

TEST_CASE("step_capsule free flight and gravity step") {
  auto p = free_space();
  RigidState s;
  s.linear_velocity = Vec3(0.01, -0.02, 0.005);
  const auto next = step_capsule(s, Wrench{}, p);
  CHECK(next.linear_velocity == s.linear_velocity);
  CHECK((next.position - p.dt * s.linear_velocity).norm() < 1e-18);

  p.gravity = Vec3(0, -9.81, 0);
  p.buoyancy_fraction = 0.0;
  const auto fall = step_capsule(RigidState{}, Wrench{}, p);
  CHECK((fall.linear_velocity - p.gravity * p.dt).norm() < 1e-15);
  CHECK((fall.position - p.gravity * p.dt * p.dt).norm() < 1e-15);

  p.buoyancy_fraction = 0.5;
  const auto half = step_capsule(RigidState{}, Wrench{}, p);
  CHECK((half.linear_velocity - 0.5 * p.gravity * p.dt).norm() < 1e-15);
}

TEST_CASE("linear drag decays geometrically") {
  auto p = free_space();
  p.dt = 0.01;
  p.linear_drag = 0.05;
  RigidState s;
  s.linear_velocity = Vec3(0.03, 0.0, -0.04);
  const double factor = 1.0 - p.dt * p.linear_drag / p.capsule_mass;
  double expected = s.linear_velocity.norm();
  double last = expected;
  for (int k = 0; k < 200; ++k) {
    s = step_capsule(s, Wrench{}, p);
    expected *= factor;
    CHECK(s.linear_velocity.norm() < last);
    CHECK(s.linear_velocity.norm() == doctest::Approx(expected).epsilon(1e-10));
    last = s.linear_velocity.norm();
  }
  CHECK(last < 1e-10);
}

TEST_CASE("kinetic energy never grows under drag alone") {
  auto p = free_space();
  p.dt = 0.01;
  p.linear_drag = 0.05;
  p.angular_drag = 8e-6;
  RigidState s;
  s.orientation = Quat(Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()));
  s.linear_velocity = Vec3(0.02, 0.01, -0.03);
  s.angular_velocity = Vec3(3.0, -1.0, 2.0);
  double ke = kinetic_energy(s, p);
  for (int k = 0; k < 10000; ++k) {
    s = step_capsule(s, Wrench{}, p);
    const double next = kinetic_energy(s, p);
    REQUIRE(next <= ke);
    ke = next;
  }
}

TEST_CASE("integrator is bitwise deterministic and keeps a unit quaternion") {
  const auto p = default_world();
  RigidState s;
  s.angular_velocity = Vec3(0.4, 2.0, -1.0);
  Wrench w{Vec3(1e-3, 2e-3, 0.0), Vec3(1e-6, 0.0, -2e-6)};
  RigidState a = s, b = s;
  for (int k = 0; k < 100; ++k) {
    a = step_capsule(a, w, p);
    b = step_capsule(b, w, p);
  }
  CHECK(std::memcmp(a.position.data(), b.position.data(), sizeof(double) * 3) == 0);
  CHECK(std::memcmp(a.orientation.coeffs().data(), b.orientation.coeffs().data(), sizeof(double) * 4) == 0);
  CHECK(std::abs(a.orientation.norm() - 1.0) < 1e-9);
  CHECK(a.finite());
}

TEST_CASE("apply_magnet_command kinematics") {
  auto p = default_world();
  RigidState m;
  m.position = Vec3(0.01, 0.2, -0.03);
  const auto same = apply_magnet_command(m, Vec3::Zero(), Vec3::Zero(), p);
  CHECK(same.position == m.position);
  CHECK(same.orientation.coeffs() == m.orientation.coeffs());

  const auto moved = apply_magnet_command(m, Vec3(0.01, 0, 0), Vec3::Zero(), p);
  CHECK(moved.position.x() - m.position.x() == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(moved.position.y() == m.position.y());

  const auto yawed = apply_magnet_command(m, Vec3::Zero(), Vec3(0, std::numbers::pi, 0), p);
  CHECK(yaw_pitch_roll(yawed.orientation).x() == doctest::Approx(0.1 * std::numbers::pi).epsilon(1e-12));
  // Rotation about the world z axis by the same amount.
  const auto rolled = apply_magnet_command(m, Vec3::Zero(), Vec3(0, 0, std::numbers::pi), p);
  CHECK(Eigen::AngleAxisd(rolled.orientation).angle() == doctest::Approx(0.1 * std::numbers::pi));
  CHECK(Eigen::AngleAxisd(rolled.orientation).axis().isApprox(Vec3::UnitZ()));
}

TEST_CASE("yaw_pitch_roll inverts the Ry Rx Rz composition") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  for (int i = 0; i < 100; ++i) {
    const Vec3 ypr(2 * u(rng), u(rng), 2 * u(rng));
    const Quat q = Eigen::AngleAxisd(ypr[0], Vec3::UnitY()) * Eigen::AngleAxisd(ypr[1], Vec3::UnitX()) *
                   Eigen::AngleAxisd(ypr[2], Vec3::UnitZ());
    CHECK((yaw_pitch_roll(q) - ypr).norm() < 1e-9);
  }
}

TEST_CASE("check_bounds precedence") {
  Bounds b;
  b.capsule_box = {Vec3(-0.1, -0.1, -0.1), Vec3(0.1, 0.1, 0.1)};
  b.magnet_box = {Vec3(-0.15, 0.1, -0.15), Vec3(0.15, 0.4, 0.15)};
  b.capsule_speed_max = 0.05;
  CHECK_NOTHROW(b.validate());
  RigidState capsule, magnet;
  magnet.position = b.magnet_box.center();
  CHECK(check_bounds(capsule, magnet, b) == Violation::none);

  capsule.linear_velocity = Vec3(0, 0, 1.01 * 0.05);
  CHECK(check_bounds(capsule, magnet, b) == Violation::capsule_velocity);

  capsule.linear_velocity.setZero();
  capsule.position = Vec3(0.2, 0, 0);
  magnet.position = Vec3(0, 1.0, 0);
  CHECK(check_bounds(capsule, magnet, b) == Violation::capsule_position);
  capsule.position.setZero();
  CHECK(check_bounds(capsule, magnet, b) == Violation::magnet_position);

  CHECK(violation_from_string(to_string(Violation::magnet_position)) == Violation::magnet_position);
  Bounds bad = b;
  bad.capsule_speed_max = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("world params validation") {
  CHECK_NOTHROW(default_world().validate());
  auto p = default_world();
  p.buoyancy_fraction = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = default_world();
  p.capsule_inertia.z() = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS((DipoleSpec{0.0, Vec3::UnitZ()}.validate()), std::invalid_argument);
}
