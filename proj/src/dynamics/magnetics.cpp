#include "capscan/dynamics/magnetics.hpp"

#include <cmath>
#include <string>

namespace capscan::dynamics {

namespace {

constexpr double kMu0Over4Pi = kMu0 / (4.0 * std::numbers::pi);

void require_separation(const Vec3& offset) {
  if (!(offset.norm() > kMinSeparation)) {
    throw SingularityError("dipole separation " + std::to_string(offset.norm()) + " m is below the singular limit");
  }
}

}  // namespace

void DipoleSpec::validate() const {
  if (!(moment_magnitude > 0.0)) throw std::invalid_argument("dipole moment magnitude must be positive");
  if (std::abs(moment_axis.norm() - 1.0) > 1e-9) throw std::invalid_argument("dipole axis must be unit length");
}

Vec3 dipole_field(const Vec3& moment, const Vec3& offset) {
  require_separation(offset);
  const double r = offset.norm();
  const Vec3 rhat = offset / r;
  return kMu0Over4Pi * (3.0 * moment.dot(rhat) * rhat - moment) / (r * r * r);
}

Eigen::Matrix3d dipole_field_jacobian(const Vec3& moment, const Vec3& offset) {
  require_separation(offset);
  // B_i = k (3 (m.r) r_i / r^5 - m_i / r^3)
  // dB_i/dr_j = 3k [ (m_j r_i + (m.r) d_ij) / r^5 - 5 (m.r) r_i r_j / r^7 + m_i r_j / r^5 ]
  const double r2 = offset.squaredNorm();
  const double r5 = r2 * r2 * std::sqrt(r2);
  const double mr = moment.dot(offset);
  Eigen::Matrix3d j = offset * moment.transpose() + moment * offset.transpose() +
                      mr * Eigen::Matrix3d::Identity() - (5.0 * mr / r2) * offset * offset.transpose();
  return (3.0 * kMu0Over4Pi / r5) * j;
}

Wrench dipole_wrench(const Vec3& source_moment, const Vec3& source_position, const Vec3& target_moment,
                     const Vec3& target_position, ForceMethod method) {
  const Vec3 offset = target_position - source_position;
  Wrench w;
  const Vec3 b = dipole_field(source_moment, offset);
  w.torque = target_moment.cross(b);
  if (method == ForceMethod::closed_form) {
    // grad(m.B)_j = sum_i m_i dB_i/dr_j
    w.force = dipole_field_jacobian(source_moment, offset).transpose() * target_moment;
  } else {
    const double h = kForceFdStep;
    for (int k = 0; k < 3; ++k) {
      Vec3 step = Vec3::Zero();
      step[k] = h;
      const double up = target_moment.dot(dipole_field(source_moment, offset + step));
      const double down = target_moment.dot(dipole_field(source_moment, offset - step));
      w.force[k] = (up - down) / (2.0 * h);
    }
  }
  return w;
}

Wrench dipole_wrench(const RigidState& magnet, const DipoleSpec& magnet_dipole, const RigidState& capsule,
                     const DipoleSpec& capsule_dipole, ForceMethod method) {
  return dipole_wrench(magnet_dipole.world_moment(magnet.orientation), magnet.position,
                       capsule_dipole.world_moment(capsule.orientation), capsule.position, method);
}

}  // namespace capscan::dynamics
