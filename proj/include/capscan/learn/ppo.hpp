#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "capscan/learn/adam.hpp"
#include "capscan/learn/networks.hpp"

namespace capscan::learn {

struct PpoConfig {
  int batch_size = 512;
  int buffer_size = 4096;
  double learning_rate = 1e-3;
  long long max_steps = 3'000'000;
  double gamma = 0.99;
  double lambda = 0.95;
  double clip_epsilon = 0.2;
  double entropy_beta = 0.005;
  int num_epoch = 5;
  int time_horizon = 1024;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  double init_log_std = std::log(0.5);

  void validate() const;
};

// Samples are columns. `u` holds the pre-squash Gaussian draws.
struct PpoBatch {
  Mat obs;
  Mat u;
  Vec old_logp;
  Vec advantages;
  Vec returns;

  Eigen::Index size() const { return obs.cols(); }
  PpoBatch select(const std::vector<Eigen::Index>& idx) const;
};

struct PpoLossTerms {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;  // mean squared error, before value_coef
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double max_ratio_deviation = 0.0;  // max |ratio - 1|
};

// Clipped surrogate + value_coef * value MSE - beta * entropy. Gradients are
// added to the non-null outputs.
PpoLossTerms ppo_loss(const GaussianActor& actor, const Network& critic, const PpoBatch& batch, const PpoConfig& cfg,
                      Vec* actor_grad, Vec* critic_grad);

// Zero mean, unit std (eps 1e-8).
Vec normalize_advantages(const Vec& a);

struct PpoUpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double first_minibatch_ratio_deviation = 0.0;
  int minibatches = 0;
};

class PpoAgent {
 public:
  struct Sample {
    Vec u;
    Vec action;  // clip(u, -1, 1)
    double logp = 0.0;
    double value = 0.0;
  };

  PpoAgent(int obs_dim, int act_dim, const std::vector<int>& hidden, PpoConfig cfg, std::uint64_t seed);

  Sample sample(const Vec& obs, std::mt19937_64& rng) const;
  Vec deterministic_action(const Vec& obs) const;
  double value(const Vec& obs) const { return critic.scalar(obs); }

  // Advantages are normalized over the whole buffer. Throws
  // std::runtime_error when a loss turns non-finite.
  PpoUpdateStats update(const PpoBatch& buffer, double lr, std::mt19937_64& rng);

  const PpoConfig& config() const { return cfg_; }

  GaussianActor actor;
  Network critic;

 private:
  PpoConfig cfg_;
  Adam actor_opt_;
  Adam critic_opt_;
};

}  // namespace capscan::learn
