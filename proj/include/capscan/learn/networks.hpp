#pragma once

#include <random>
#include <vector>

#include "capscan/learn/mlp.hpp"

namespace capscan::learn {

struct Network {
  Mlp mlp;
  Vec theta;

  Network() = default;
  explicit Network(Mlp m) : mlp(std::move(m)), theta(Vec::Zero(static_cast<Eigen::Index>(mlp.parameter_count()))) {}

  Mat forward(const Mat& x, Mlp::Cache* cache = nullptr) const { return mlp.forward(theta, x, cache); }
  double scalar(const Vec& x) const { return forward(x)(0, 0); }
};

// Gaussian policy head: an MLP for the mean plus a state-independent
// log-std. theta = [mlp parameters, log_std].
struct GaussianActor {
  Mlp mlp;
  Vec theta;
  int action_dim = 0;

  GaussianActor() = default;
  GaussianActor(int obs_dim, const std::vector<int>& hidden, int act_dim, double init_log_std);

  std::size_t net_size() const { return mlp.parameter_count(); }
  Eigen::Ref<const Vec> net_params() const { return theta.head(static_cast<Eigen::Index>(net_size())); }
  Vec log_std() const { return theta.tail(action_dim); }
  Mat mean(const Mat& obs, Mlp::Cache* cache = nullptr) const { return mlp.forward(net_params(), obs, cache); }

  void init(std::mt19937_64& rng, double hidden_gain = 1.4142135623730951, double output_gain = 0.01);
  // Clamps log_std into [kLogStdMin, kLogStdMax].
  void project();
};

// Standard normal draws, one column per sample.
Mat standard_normal(int rows, int cols, std::mt19937_64& rng);

}  // namespace capscan::learn
