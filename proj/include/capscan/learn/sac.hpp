#pragma once

#include <optional>
#include <random>
#include <vector>

#include "capscan/learn/adam.hpp"
#include "capscan/learn/networks.hpp"

namespace capscan::learn {

struct SacConfig {
  int batch_size = 512;
  std::size_t replay_capacity = 512'000;
  double learning_rate = 5e-4;
  long long max_steps = 3'000'000;
  double gamma = 0.99;
  double tau = 0.005;
  double init_alpha = 1.0;
  std::optional<double> target_entropy;  // defaults to -action_dim
  long long warmup_steps = 5000;          // uniform random actions before learning
  int steps_per_update = 1;               // env steps per gradient update
  double init_log_std = std::log(0.5);

  void validate() const;
};

struct Transition {
  Vec obs;
  Vec action;  // squashed, in [-1, 1]
  double reward = 0.0;
  Vec next_obs;
  bool terminated = false;
  bool truncated = false;  // bootstraps like a non-terminal step
};

struct SacBatch {
  Mat obs;
  Mat action;
  Vec reward;
  Mat next_obs;
  Vec terminated;  // 1.0 or 0.0

  Eigen::Index size() const { return obs.cols(); }
};

// Fixed-capacity FIFO: once full, each insert overwrites the oldest entry.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int obs_dim, int act_dim);

  void add(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  // Uniform with replacement. `indices`, when given, receives the slots drawn.
  SacBatch sample(int n, std::mt19937_64& rng, std::vector<std::size_t>* indices = nullptr) const;
  // Slot of the i-th oldest stored transition.
  std::size_t slot_of_oldest(std::size_t i) const;
  double reward_at(std::size_t slot) const { return reward_[static_cast<Eigen::Index>(slot)]; }

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // next write
  Mat obs_, next_obs_, action_;
  Vec reward_, terminated_;
};

Mat concat_rows(const Mat& a, const Mat& b);

// target <- (1 - tau) * target + tau * online
void polyak(Vec& target, const Vec& online, double tau);

struct SquashedSample {
  Mat mean, u, action;  // action = tanh(u)
  Vec logp;
};
SquashedSample sample_squashed(const GaussianActor& actor, const Mat& obs, const Mat& noise,
                               Mlp::Cache* cache = nullptr);

// y = r + gamma * (1 - terminated) * (min(Q1', Q2')(s', a') - alpha * logpi(a'|s'))
// with a' drawn from the actor through `noise_next`.
Vec sac_targets(const GaussianActor& actor, const Network& q1_target, const Network& q2_target, double alpha,
                double gamma, const SacBatch& batch, const Mat& noise_next);

// mean((Q(s, a) - y)^2)
double sac_critic_loss(const Network& q, const SacBatch& batch, const Vec& y, Vec* grad);

struct SacActorTerms {
  double loss = 0.0;
  double mean_logp = 0.0;
};
// mean(alpha * logpi(a|s) - min(Q1, Q2)(s, a)) with a reparameterized
// through `noise`.
SacActorTerms sac_actor_loss(const GaussianActor& actor, const Network& q1, const Network& q2, double alpha,
                             const Mat& obs, const Mat& noise, Vec* grad);

// -log_alpha * (mean_logp + target_entropy)
double sac_alpha_loss(double log_alpha, double mean_logp, double target_entropy, double* grad);

struct SacUpdateStats {
  double q1_loss = 0.0;
  double q2_loss = 0.0;
  double policy_loss = 0.0;
  double alpha = 0.0;
  double entropy = 0.0;  // -mean logpi
};

class SacAgent {
 public:
  SacAgent(int obs_dim, int act_dim, const std::vector<int>& hidden, SacConfig cfg, std::uint64_t seed);

  Vec sample(const Vec& obs, std::mt19937_64& rng) const;
  Vec deterministic_action(const Vec& obs) const;

  // Critic step, actor step against the updated critics, temperature step,
  // then Polyak averaging. Throws std::runtime_error on a non-finite loss.
  SacUpdateStats update(const SacBatch& batch, double lr, std::mt19937_64& rng);

  double alpha() const { return std::exp(log_alpha); }
  double target_entropy() const { return target_entropy_; }
  const SacConfig& config() const { return cfg_; }

  GaussianActor actor;
  Network q1, q2, q1_target, q2_target;
  double log_alpha = 0.0;

 private:
  SacConfig cfg_;
  double target_entropy_;
  Adam actor_opt_, q1_opt_, q2_opt_, alpha_opt_;
};

}  // namespace capscan::learn
