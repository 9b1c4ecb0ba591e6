#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <limits>
#include <stdexcept>
#include <string>

namespace capscan {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Y is up throughout; the horizontal plane is x-z.
inline const Vec3 kUp = Vec3::UnitY();

// Raised when a caller breaks an operation's precondition (stepping a finished
// episode, feeding a policy output that is not finite, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void grow(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void grow(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 extent() const { return hi - lo; }
  bool valid() const { return (hi.array() > lo.array()).all(); }
  // Grows each side by `fraction` of the box extent on that axis.
  Aabb inflated(double fraction) const {
    const Vec3 pad = 0.5 * fraction * extent();
    return {lo - pad, hi + pad};
  }
};

}  // namespace capscan
