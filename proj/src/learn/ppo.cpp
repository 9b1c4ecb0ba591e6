#include "capscan/learn/ppo.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "capscan/learn/distributions.hpp"

namespace capscan::learn {

void PpoConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("ppo: " + m); };
  if (batch_size < 1 || buffer_size < 1) fail("batch_size and buffer_size must be positive");
  if (batch_size > buffer_size) fail("batch_size must not exceed buffer_size");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (max_steps < 0) fail("max_steps must be non-negative");
  if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma must lie in (0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail("lambda must lie in [0, 1]");
  if (!(clip_epsilon > 0.0)) fail("clip_epsilon must be positive");
  if (!(entropy_beta >= 0.0)) fail("entropy_beta must be non-negative");
  if (num_epoch < 1 || time_horizon < 1) fail("num_epoch and time_horizon must be positive");
  if (!(value_coef >= 0.0) || !(max_grad_norm > 0.0)) fail("value_coef must be >= 0 and max_grad_norm > 0");
}

PpoBatch PpoBatch::select(const std::vector<Eigen::Index>& idx) const {
  PpoBatch b;
  const auto n = static_cast<Eigen::Index>(idx.size());
  b.obs.resize(obs.rows(), n);
  b.u.resize(u.rows(), n);
  b.old_logp.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto i = idx[static_cast<std::size_t>(k)];
    b.obs.col(k) = obs.col(i);
    b.u.col(k) = u.col(i);
    b.old_logp[k] = old_logp[i];
    b.advantages[k] = advantages[i];
    b.returns[k] = returns[i];
  }
  return b;
}

PpoLossTerms ppo_loss(const GaussianActor& actor, const Network& critic, const PpoBatch& batch, const PpoConfig& cfg,
                      Vec* actor_grad, Vec* critic_grad) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw std::invalid_argument("ppo_loss on an empty batch");
  const double inv_n = 1.0 / static_cast<double>(n);
  const int act = actor.action_dim;

  Mlp::Cache actor_cache, critic_cache;
  const Mat mean = actor.mean(batch.obs, &actor_cache);
  const Vec log_std = actor.log_std();
  const Vec inv_var = (-2.0 * log_std).array().exp();
  const Mat values = critic.forward(batch.obs, &critic_cache);

  PpoLossTerms t;
  Mat d_mean = Mat::Zero(act, n);
  Vec d_log_std = Vec::Zero(act);
  Mat d_value(1, n);
  int clipped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec diff = batch.u.col(i) - mean.col(i);
    const double logp = gaussian_logprob(batch.u.col(i), mean.col(i), log_std);
    const double ratio = std::exp(logp - batch.old_logp[i]);
    const double a = batch.advantages[i];
    const double clipped_ratio = std::clamp(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
    const double unclipped_obj = ratio * a;
    const double clipped_obj = clipped_ratio * a;
    t.max_ratio_deviation = std::max(t.max_ratio_deviation, std::abs(ratio - 1.0));
    double d_logp = 0.0;
    if (clipped_obj < unclipped_obj) {
      t.policy -= clipped_obj;
      ++clipped;  // flat branch: no gradient
    } else {
      t.policy -= unclipped_obj;
      d_logp = -unclipped_obj * inv_n;
    }
    if (d_logp != 0.0) {
      d_mean.col(i) = d_logp * diff.cwiseProduct(inv_var);
      d_log_std += d_logp * (diff.cwiseProduct(diff).cwiseProduct(inv_var).array() - 1.0).matrix();
    }
    const double err = values(0, i) - batch.returns[i];
    t.value += err * err;
    d_value(0, i) = cfg.value_coef * 2.0 * err * inv_n;
  }
  t.policy *= inv_n;
  t.value *= inv_n;
  t.entropy = gaussian_entropy(log_std);
  t.clip_fraction = clipped * inv_n;
  t.total = t.policy + cfg.value_coef * t.value - cfg.entropy_beta * t.entropy;

  if (actor_grad) {
    d_log_std.array() -= cfg.entropy_beta;
    actor.mlp.backward(actor.net_params(), actor_cache, d_mean,
                       actor_grad->head(static_cast<Eigen::Index>(actor.net_size())));
    actor_grad->tail(act) += d_log_std;
  }
  if (critic_grad) critic.mlp.backward(critic.theta, critic_cache, d_value, *critic_grad);
  return t;
}

Vec normalize_advantages(const Vec& a) {
  const double mean = a.mean();
  const Vec c = a.array() - mean;
  const double std = std::sqrt(c.squaredNorm() / static_cast<double>(a.size()));
  return c / (std + 1e-8);
}

PpoAgent::PpoAgent(int obs_dim, int act_dim, const std::vector<int>& hidden, PpoConfig cfg, std::uint64_t seed)
    : actor(obs_dim, hidden, act_dim, cfg.init_log_std), critic(Mlp(obs_dim, hidden, 1)), cfg_(cfg) {
  cfg_.validate();
  std::mt19937_64 rng(seed);
  actor.init(rng, std::sqrt(2.0), 0.01);
  critic.mlp.init(critic.theta, rng, std::sqrt(2.0), 1.0);
  actor_opt_ = Adam(actor.theta.size());
  critic_opt_ = Adam(critic.theta.size());
}

PpoAgent::Sample PpoAgent::sample(const Vec& obs, std::mt19937_64& rng) const {
  Sample s;
  const Vec mean = actor.mean(obs);
  const Vec log_std = actor.log_std();
  const Mat eps = standard_normal(actor.action_dim, 1, rng);
  s.u = mean + log_std.array().exp().matrix().cwiseProduct(eps.col(0));
  s.action = s.u.cwiseMax(-1.0).cwiseMin(1.0);
  s.logp = gaussian_logprob(s.u, mean, log_std);
  s.value = value(obs);
  return s;
}

Vec PpoAgent::deterministic_action(const Vec& obs) const {
  return Vec(actor.mean(obs)).cwiseMax(-1.0).cwiseMin(1.0);
}

PpoUpdateStats PpoAgent::update(const PpoBatch& buffer, double lr, std::mt19937_64& rng) {
  PpoBatch data = buffer;
  data.advantages = normalize_advantages(buffer.advantages);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  PpoUpdateStats stats;
  for (int epoch = 0; epoch < cfg_.num_epoch; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start + static_cast<std::size_t>(cfg_.batch_size) <= order.size();
         start += static_cast<std::size_t>(cfg_.batch_size)) {
      const std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(start + cfg_.batch_size));
      const PpoBatch mb = data.select(idx);
      Vec ga = Vec::Zero(actor.theta.size());
      Vec gc = Vec::Zero(critic.theta.size());
      const auto terms = ppo_loss(actor, critic, mb, cfg_, &ga, &gc);
      if (!std::isfinite(terms.total) || !ga.allFinite() || !gc.allFinite()) {
        std::ostringstream msg;
        msg << "ppo: non-finite loss at epoch " << epoch << " minibatch " << stats.minibatches << " (policy "
            << terms.policy << ", value " << terms.value << ", entropy " << terms.entropy << ")";
        throw std::runtime_error(msg.str());
      }
      if (stats.minibatches == 0) stats.first_minibatch_ratio_deviation = terms.max_ratio_deviation;
      clip_global_norm({&ga, &gc}, cfg_.max_grad_norm);
      actor_opt_.step(actor.theta, ga, lr);
      actor.project();
      critic_opt_.step(critic.theta, gc, lr);
      stats.policy_loss += terms.policy;
      stats.value_loss += terms.value;
      stats.entropy += terms.entropy;
      stats.clip_fraction += terms.clip_fraction;
      ++stats.minibatches;
    }
  }
  if (stats.minibatches > 0) {
    const double inv = 1.0 / stats.minibatches;
    stats.policy_loss *= inv;
    stats.value_loss *= inv;
    stats.entropy *= inv;
    stats.clip_fraction *= inv;
  }
  return stats;
}

}  // namespace capscan::learn
