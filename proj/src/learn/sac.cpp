#include "capscan/learn/sac.hpp"

#include <sstream>
#include <stdexcept>

#include "capscan/learn/distributions.hpp"

namespace capscan::learn {

void SacConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("sac: " + m); };
  if (batch_size < 1) fail("batch_size must be positive");
  if (replay_capacity < static_cast<std::size_t>(batch_size)) fail("replay_capacity must be >= batch_size");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (max_steps < 0) fail("max_steps must be non-negative");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must lie in [0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) fail("tau must lie in (0, 1]");
  if (!(init_alpha > 0.0)) fail("init_alpha must be positive");
  if (warmup_steps < 0) fail("warmup_steps must be non-negative");
  if (steps_per_update < 1) fail("steps_per_update must be >= 1");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, int obs_dim, int act_dim)
    : capacity_(capacity),
      obs_(obs_dim, static_cast<Eigen::Index>(capacity)),
      next_obs_(obs_dim, static_cast<Eigen::Index>(capacity)),
      action_(act_dim, static_cast<Eigen::Index>(capacity)),
      reward_(static_cast<Eigen::Index>(capacity)),
      terminated_(static_cast<Eigen::Index>(capacity)) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayBuffer::add(const Transition& t) {
  if (t.obs.size() != obs_.rows() || t.next_obs.size() != obs_.rows() || t.action.size() != action_.rows()) {
    throw std::invalid_argument("transition shape does not match the replay buffer");
  }
  if (!t.obs.allFinite() || !t.next_obs.allFinite() || !t.action.allFinite() || !std::isfinite(t.reward)) {
    throw std::invalid_argument("transition contains non-finite values");
  }
  const auto k = static_cast<Eigen::Index>(head_);
  obs_.col(k) = t.obs;
  next_obs_.col(k) = t.next_obs;
  action_.col(k) = t.action;
  reward_[k] = t.reward;
  terminated_[k] = t.terminated ? 1.0 : 0.0;
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

std::size_t ReplayBuffer::slot_of_oldest(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay index out of range");
  const std::size_t start = size_ < capacity_ ? 0 : head_;
  return (start + i) % capacity_;
}

SacBatch ReplayBuffer::sample(int n, std::mt19937_64& rng, std::vector<std::size_t>* indices) const {
  if (size_ == 0) throw std::logic_error("sampling an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  SacBatch b;
  b.obs.resize(obs_.rows(), n);
  b.next_obs.resize(obs_.rows(), n);
  b.action.resize(action_.rows(), n);
  b.reward.resize(n);
  b.terminated.resize(n);
  if (indices) indices->clear();
  for (int j = 0; j < n; ++j) {
    const auto k = static_cast<Eigen::Index>(pick(rng));
    if (indices) indices->push_back(static_cast<std::size_t>(k));
    b.obs.col(j) = obs_.col(k);
    b.next_obs.col(j) = next_obs_.col(k);
    b.action.col(j) = action_.col(k);
    b.reward[j] = reward_[k];
    b.terminated[j] = terminated_[k];
  }
  return b;
}

Mat concat_rows(const Mat& a, const Mat& b) {
  Mat out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

void polyak(Vec& target, const Vec& online, double tau) {
  if (target.size() != online.size()) throw std::invalid_argument("polyak size mismatch");
  target = (1.0 - tau) * target + tau * online;
}

SquashedSample sample_squashed(const GaussianActor& actor, const Mat& obs, const Mat& noise, Mlp::Cache* cache) {
  SquashedSample s;
  s.mean = actor.mean(obs, cache);
  const Vec log_std = actor.log_std();
  const Vec std = log_std.array().exp();
  s.u = s.mean + std.asDiagonal() * noise;
  s.action = s.u.array().tanh();
  s.logp.resize(obs.cols());
  for (Eigen::Index i = 0; i < obs.cols(); ++i) s.logp[i] = squashed_logprob(s.mean.col(i), log_std, s.u.col(i));
  return s;
}

Vec sac_targets(const GaussianActor& actor, const Network& q1_target, const Network& q2_target, double alpha,
                double gamma, const SacBatch& batch, const Mat& noise_next) {
  const auto next = sample_squashed(actor, batch.next_obs, noise_next);
  const Mat in = concat_rows(batch.next_obs, next.action);
  const Vec q = q1_target.forward(in).row(0).cwiseMin(q2_target.forward(in).row(0)).transpose();
  const Vec soft = q - alpha * next.logp;
  return batch.reward + gamma * (1.0 - batch.terminated.array()).matrix().cwiseProduct(soft);
}

double sac_critic_loss(const Network& q, const SacBatch& batch, const Vec& y, Vec* grad) {
  Mlp::Cache cache;
  const Mat pred = q.forward(concat_rows(batch.obs, batch.action), &cache);
  const Vec err = pred.row(0).transpose() - y;
  const double n = static_cast<double>(batch.size());
  if (grad) {
    const Mat dy = (2.0 / n) * err.transpose();
    q.mlp.backward(q.theta, cache, dy, *grad);
  }
  return err.squaredNorm() / n;
}

SacActorTerms sac_actor_loss(const GaussianActor& actor, const Network& q1, const Network& q2, double alpha,
                             const Mat& obs, const Mat& noise, Vec* grad) {
  const Eigen::Index n = obs.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  Mlp::Cache actor_cache, c1, c2;
  const auto s = sample_squashed(actor, obs, noise, &actor_cache);
  const Mat in = concat_rows(obs, s.action);
  const Mat v1 = q1.forward(in, &c1);
  const Mat v2 = q2.forward(in, &c2);

  SacActorTerms t;
  Mat pick1 = Mat::Zero(1, n), pick2 = Mat::Zero(1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool first = v1(0, i) <= v2(0, i);
    (first ? pick1 : pick2)(0, i) = 1.0;
    t.loss += alpha * s.logp[i] - (first ? v1(0, i) : v2(0, i));
  }
  t.loss *= inv_n;
  t.mean_logp = s.logp.mean();
  if (!grad) return t;

  // dQmin/da through whichever critic was smaller.
  Vec scratch1 = Vec::Zero(q1.theta.size()), scratch2 = Vec::Zero(q2.theta.size());
  Mat dx1, dx2;
  q1.mlp.backward(q1.theta, c1, pick1, scratch1, &dx1);
  q2.mlp.backward(q2.theta, c2, pick2, scratch2, &dx2);
  const int act = actor.action_dim;
  const Mat dq_da = dx1.bottomRows(act) + dx2.bottomRows(act);

  const Vec log_std = actor.log_std();
  const Vec std = log_std.array().exp();
  const Vec inv_var = (-2.0 * log_std).array().exp();

  Mat d_mean(act, n);
  Vec d_log_std = Vec::Zero(act);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < act; ++j) {
      const double a = s.action(j, i);
      const double one_minus = 1.0 - a * a;
      const double diff = s.u(j, i) - s.mean(j, i);
      // logpi = logN(u; mean, std) - log(1 - tanh(u)^2 + eps)
      const double dlogn_du = -diff * inv_var[j];
      const double dcorr_du = 2.0 * a * one_minus / (one_minus + kSquashEpsilon);
      const double dl_du = inv_n * (alpha * (dlogn_du + dcorr_du) - dq_da(j, i) * one_minus);
      d_mean(j, i) = dl_du + inv_n * alpha * diff * inv_var[j];
      d_log_std[j] += dl_du * std[j] * noise(j, i) + inv_n * alpha * (diff * diff * inv_var[j] - 1.0);
    }
  }
  actor.mlp.backward(actor.net_params(), actor_cache, d_mean, grad->head(static_cast<Eigen::Index>(actor.net_size())));
  grad->tail(act) += d_log_std;
  return t;
}

double sac_alpha_loss(double log_alpha, double mean_logp, double target_entropy, double* grad) {
  if (grad) *grad += -(mean_logp + target_entropy);
  return -log_alpha * (mean_logp + target_entropy);
}

SacAgent::SacAgent(int obs_dim, int act_dim, const std::vector<int>& hidden, SacConfig cfg, std::uint64_t seed)
    : actor(obs_dim, hidden, act_dim, cfg.init_log_std),
      q1(Mlp(obs_dim + act_dim, hidden, 1)),
      q2(Mlp(obs_dim + act_dim, hidden, 1)),
      cfg_(cfg) {
  cfg_.validate();
  target_entropy_ = cfg_.target_entropy.value_or(-static_cast<double>(act_dim));
  std::mt19937_64 rng(seed);
  actor.init(rng, std::sqrt(2.0), 0.01);
  q1.mlp.init(q1.theta, rng, std::sqrt(2.0), 1.0);
  q2.mlp.init(q2.theta, rng, std::sqrt(2.0), 1.0);
  q1_target = q1;
  q2_target = q2;
  log_alpha = std::log(cfg_.init_alpha);
  actor_opt_ = Adam(actor.theta.size());
  q1_opt_ = Adam(q1.theta.size());
  q2_opt_ = Adam(q2.theta.size());
  alpha_opt_ = Adam(1);
}

Vec SacAgent::sample(const Vec& obs, std::mt19937_64& rng) const {
  const Mat noise = standard_normal(actor.action_dim, 1, rng);
  return sample_squashed(actor, obs, noise).action.col(0);
}

Vec SacAgent::deterministic_action(const Vec& obs) const { return actor.mean(obs).array().tanh(); }

SacUpdateStats SacAgent::update(const SacBatch& batch, double lr, std::mt19937_64& rng) {
  const int n = static_cast<int>(batch.size());
  const int act = actor.action_dim;
  SacUpdateStats st;
  const double alpha = std::exp(log_alpha);

  const Vec y = sac_targets(actor, q1_target, q2_target, alpha, cfg_.gamma, batch, standard_normal(act, n, rng));
  Vec g1 = Vec::Zero(q1.theta.size()), g2 = Vec::Zero(q2.theta.size());
  st.q1_loss = sac_critic_loss(q1, batch, y, &g1);
  st.q2_loss = sac_critic_loss(q2, batch, y, &g2);

  Vec ga = Vec::Zero(actor.theta.size());
  const bool critics_ok = std::isfinite(st.q1_loss) && std::isfinite(st.q2_loss) && g1.allFinite() && g2.allFinite();
  if (critics_ok) {
    q1_opt_.step(q1.theta, g1, lr);
    q2_opt_.step(q2.theta, g2, lr);
  }
  const auto terms = critics_ok ? sac_actor_loss(actor, q1, q2, alpha, batch.obs, standard_normal(act, n, rng), &ga)
                                : SacActorTerms{NAN, NAN};
  if (!critics_ok || !std::isfinite(terms.loss) || !ga.allFinite()) {
    std::ostringstream msg;
    msg << "sac: non-finite loss (q1 " << st.q1_loss << ", q2 " << st.q2_loss << ", policy " << terms.loss
        << ", alpha " << alpha << ")";
    throw std::runtime_error(msg.str());
  }
  actor_opt_.step(actor.theta, ga, lr);
  actor.project();

  Vec g_alpha = Vec::Zero(1);
  sac_alpha_loss(log_alpha, terms.mean_logp, target_entropy_, &g_alpha[0]);
  Vec la(1);
  la[0] = log_alpha;
  alpha_opt_.step(la, g_alpha, lr);
  log_alpha = la[0];

  polyak(q1_target.theta, q1.theta, cfg_.tau);
  polyak(q2_target.theta, q2.theta, cfg_.tau);

  st.policy_loss = terms.loss;
  st.alpha = std::exp(log_alpha);
  st.entropy = -terms.mean_logp;
  return st;
}

}  // namespace capscan::learn
