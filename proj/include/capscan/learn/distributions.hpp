#pragma once

#include <vector>

#include "capscan/common/types.hpp"

namespace capscan::learn {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kSquashEpsilon = 1e-6;
inline constexpr double kLrFloor = 1e-10;

// Diagonal Gaussian log density of `u`.
double gaussian_logprob(const Vec& u, const Vec& mean, const Vec& log_std);
// Differential entropy of the diagonal Gaussian.
double gaussian_entropy(const Vec& log_std);
// sum_j log(1 - tanh(u_j)^2 + eps)
double squash_correction(const Vec& u);
// Log density of a = tanh(u) where u ~ N(mean, exp(log_std)^2).
double squashed_logprob(const Vec& mean, const Vec& log_std, const Vec& u);

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Generalized advantage estimation over one trajectory segment. Pass the
// value of the state after the last step as `bootstrap`, or 0 when the
// segment ended in a terminal state.
GaeResult gae(const std::vector<double>& rewards, const std::vector<double>& values, double bootstrap, double gamma,
              double lambda);

// lr0 * (1 - step / max_steps), floored at kLrFloor.
double linear_lr(long long step, long long max_steps, double lr0);

}  // namespace capscan::learn
