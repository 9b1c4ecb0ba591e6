#pragma once

#include <numbers>
#include <stdexcept>

#include "capscan/common/types.hpp"
#include "capscan/dynamics/rigid_body.hpp"

namespace capscan::dynamics {

inline constexpr double kMu0 = 4.0e-7 * std::numbers::pi;  // T*m/A
inline constexpr double kMinSeparation = 1e-6;            // m
inline constexpr double kForceFdStep = 1e-6;              // m

class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Point magnetic dipole rigidly attached to a body.
struct DipoleSpec {
  double moment_magnitude = 1.0;           // A*m^2
  Vec3 moment_axis = Vec3::UnitZ();        // body frame, unit length

  void validate() const;
  Vec3 world_moment(const Quat& orientation) const { return moment_magnitude * (orientation * moment_axis); }
};

struct Wrench {
  Vec3 force = Vec3::Zero();   // N
  Vec3 torque = Vec3::Zero();  // N*m
};

// Field of a dipole `moment` at displacement `offset` from it:
// B = mu0/(4 pi) * (3 (m.r^) r^ - m) / |r|^3. Throws SingularityError when
// |offset| <= kMinSeparation.
Vec3 dipole_field(const Vec3& moment, const Vec3& offset);

// Jacobian dB/d(offset) of dipole_field.
Eigen::Matrix3d dipole_field_jacobian(const Vec3& moment, const Vec3& offset);

enum class ForceMethod { closed_form, finite_difference };

// Force grad(m_t . B_s) and torque m_t x B_s on a target dipole from a source
// dipole.
Wrench dipole_wrench(const Vec3& source_moment, const Vec3& source_position, const Vec3& target_moment,
                     const Vec3& target_position, ForceMethod method = ForceMethod::closed_form);

// Wrench on the capsule from the external magnet.
Wrench dipole_wrench(const RigidState& magnet, const DipoleSpec& magnet_dipole, const RigidState& capsule,
                     const DipoleSpec& capsule_dipole, ForceMethod method = ForceMethod::closed_form);

}  // namespace capscan::dynamics
