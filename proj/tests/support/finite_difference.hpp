#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "capscan/common/types.hpp"

namespace capscan::testing {

struct GradCheck {
  double max_rel_error = 0.0;
  Eigen::Index worst = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  Eigen::Index checked = 0;
};

// Central differences of `loss` with respect to each entry of `theta`
// (perturbed in place and restored). Relative error uses
// max(|analytic|, |numeric|, floor) as denominator so entries whose true
// gradient is zero are judged on absolute error.
inline GradCheck check_gradient(Vec& theta, const Vec& analytic, const std::function<double()>& loss, double h = 1e-5,
                                double floor = 1e-6) {
  GradCheck r;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + h;
    const double up = loss();
    theta[i] = saved - h;
    const double down = loss();
    theta[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (rel > r.max_rel_error || r.worst < 0) {
      r.max_rel_error = std::max(rel, r.max_rel_error);
      if (rel >= r.max_rel_error) {
        r.worst = i;
        r.analytic = analytic[i];
        r.numeric = numeric;
      }
    }
    ++r.checked;
  }
  return r;
}

}  // namespace capscan::testing
