#include "capscan/learn/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace capscan::learn {

namespace {
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
}

double gaussian_logprob(const Vec& u, const Vec& mean, const Vec& log_std) {
  if (u.size() != mean.size() || u.size() != log_std.size()) throw std::invalid_argument("gaussian_logprob size mismatch");
  const Vec z = (u - mean).array() * (-log_std).array().exp();
  return -0.5 * z.squaredNorm() - log_std.sum() - static_cast<double>(u.size()) * kHalfLog2Pi;
}

double gaussian_entropy(const Vec& log_std) {
  return log_std.sum() + static_cast<double>(log_std.size()) * (0.5 + kHalfLog2Pi);
}

double squash_correction(const Vec& u) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    const double t = std::tanh(u[j]);
    s += std::log(1.0 - t * t + kSquashEpsilon);
  }
  return s;
}

double squashed_logprob(const Vec& mean, const Vec& log_std, const Vec& u) {
  return gaussian_logprob(u, mean, log_std) - squash_correction(u);
}

GaeResult gae(const std::vector<double>& rewards, const std::vector<double>& values, double bootstrap, double gamma,
              double lambda) {
  if (rewards.size() != values.size()) throw std::invalid_argument("gae: rewards and values differ in length");
  const std::size_t n = rewards.size();
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_value = bootstrap;
  double next_adv = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double delta = rewards[k] + gamma * next_value - values[k];
    next_adv = delta + gamma * lambda * next_adv;
    out.advantages[k] = next_adv;
    out.returns[k] = next_adv + values[k];
    next_value = values[k];
  }
  return out;
}

double linear_lr(long long step, long long max_steps, double lr0) {
  if (max_steps <= 0) return kLrFloor;
  const double frac = std::clamp(static_cast<double>(step) / static_cast<double>(max_steps), 0.0, 1.0);
  return std::max(lr0 * (1.0 - frac), kLrFloor);
}

}  // namespace capscan::learn
