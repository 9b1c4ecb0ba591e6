#include "capscan/learn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "capscan/learn/distributions.hpp"

namespace capscan::learn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix(splitmix(seed) ^ stream); }

struct Window {
  int episodes = 0;
  double reward = 0.0, length = 0.0, coverage = 0.0;
  int updates = 0;
  double policy = 0.0, value = 0.0, entropy = 0.0;

  void add_update(double p, double v, double e) {
    ++updates;
    policy += p;
    value += v;
    entropy += e;
  }

  TrainStats flush(long long step, double lr) {
    TrainStats s;
    s.step = step;
    s.episodes = episodes;
    s.mean_reward = episodes ? reward / episodes : kNaN;
    s.mean_length = episodes ? length / episodes : kNaN;
    s.mean_coverage = episodes ? coverage / episodes : kNaN;
    s.policy_loss = updates ? policy / updates : kNaN;
    s.value_loss = updates ? value / updates : kNaN;
    s.entropy = updates ? entropy / updates : kNaN;
    s.learning_rate = lr;
    *this = Window{};
    return s;
  }
};

// Episode bookkeeping shared by both trainers.
class EpisodeDriver {
 public:
  EpisodeDriver(env::CoverageEnv& env, std::uint64_t seed, const TrainHooks& hooks, std::string controller)
      : env_(env), rng_(stream_seed(seed, 1)), hooks_(hooks), controller_(std::move(controller)) {}

  Vec reset() {
    episode_ = env::EpisodeConfig{};
    episode_.seed = rng_();
    episode_.max_steps = env_.config().max_steps;
    total_reward_ = 0.0;
    length_ = 0;
    if (hooks_.on_episode) {
      record_ = env::EpisodeRecord{};
      record_.env = env_.config();
      record_.episode = episode_;
      record_.controller = controller_;
    }
    return env_.normalizer()(env_.reset(episode_));
  }

  env::StepResult step(const Vec& action, long long global_step) {
    env::StepResult r;
    try {
      r = env_.step(std::span<const double>(action.data(), static_cast<std::size_t>(action.size())));
    } catch (const std::exception& e) {
      throw std::runtime_error("environment failure at training step " + std::to_string(global_step) + ": " +
                               e.what());
    }
    total_reward_ += r.reward;
    ++length_;
    if (hooks_.on_episode) {
      record_.steps.push_back(
          env::make_step_log(env_, std::span<const double>(action.data(), static_cast<std::size_t>(action.size())), r));
    }
    return r;
  }

  void finish(Window& w, double final_coverage) {
    ++w.episodes;
    ++episodes_;
    w.reward += total_reward_;
    w.length += length_;
    w.coverage += final_coverage;
    if (hooks_.on_episode) hooks_.on_episode(record_);
  }

  Vec normalize(const env::Observation& o) const { return env_.normalizer()(o); }
  int episodes() const { return episodes_; }

 private:
  env::CoverageEnv& env_;
  std::mt19937_64 rng_;
  const TrainHooks& hooks_;
  std::string controller_;
  env::EpisodeConfig episode_;
  env::EpisodeRecord record_;
  double total_reward_ = 0.0;
  int length_ = 0;
  int episodes_ = 0;
};

nlohmann::json descriptor(const TrainConfig& cfg, const env::CoverageEnv& env, long long step) {
  return {{"format", "capscan-policy"},
          {"algorithm", to_string(cfg.algorithm)},
          {"obs_dim", static_cast<int>(env::kObservationSize)},
          {"act_dim", env.action_dim()},
          {"hidden", cfg.hidden},
          {"step", step},
          {"seed", cfg.seed},
          {"train", to_json(cfg)},
          {"env", env::to_json(env.config())}};
}

class Emitter {
 public:
  Emitter(const TrainConfig& cfg, const TrainHooks& hooks, TrainResult& result)
      : cfg_(cfg), hooks_(hooks), result_(result) {}

  void stats(Window& w, long long step) {
    const auto s = w.flush(step, linear_lr(step, cfg_.max_steps(), cfg_.learning_rate()));
    result_.stats.push_back(s);
    if (hooks_.on_stats) hooks_.on_stats(s);
  }

  void checkpoint(long long step, Checkpoint ck) {
    if (hooks_.on_checkpoint) hooks_.on_checkpoint(step, ck);
    result_.final_checkpoint = std::move(ck);
  }

 private:
  const TrainConfig& cfg_;
  const TrainHooks& hooks_;
  TrainResult& result_;
};

Checkpoint ppo_checkpoint(const TrainConfig& cfg, const env::CoverageEnv& env, const PpoAgent& a, long long step) {
  Checkpoint ck;
  ck.descriptor = descriptor(cfg, env, step);
  ck.blocks = {{"actor", a.actor.theta}, {"critic", a.critic.theta}};
  return ck;
}

Checkpoint sac_checkpoint(const TrainConfig& cfg, const env::CoverageEnv& env, const SacAgent& a, long long step) {
  Checkpoint ck;
  ck.descriptor = descriptor(cfg, env, step);
  ck.blocks = {{"actor", a.actor.theta},           {"q1", a.q1.theta},
               {"q2", a.q2.theta},                 {"q1_target", a.q1_target.theta},
               {"q2_target", a.q2_target.theta},   {"log_alpha", Vec::Constant(1, a.log_alpha)}};
  return ck;
}

struct Rollout {
  std::vector<Vec> obs, u;
  std::vector<double> logp, adv, ret;
  // current segment
  std::vector<double> seg_rewards, seg_values;
  std::size_t seg_start = 0;

  std::size_t size() const { return obs.size(); }
  std::size_t segment_size() const { return obs.size() - seg_start; }

  void close_segment(double bootstrap, double gamma, double lambda) {
    const auto g = gae(seg_rewards, seg_values, bootstrap, gamma, lambda);
    adv.insert(adv.end(), g.advantages.begin(), g.advantages.end());
    ret.insert(ret.end(), g.returns.begin(), g.returns.end());
    seg_rewards.clear();
    seg_values.clear();
    seg_start = obs.size();
  }

  PpoBatch batch() const {
    const auto n = static_cast<Eigen::Index>(obs.size());
    PpoBatch b;
    b.obs.resize(obs.front().size(), n);
    b.u.resize(u.front().size(), n);
    b.old_logp.resize(n);
    b.advantages.resize(n);
    b.returns.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      b.obs.col(i) = obs[k];
      b.u.col(i) = u[k];
      b.old_logp[i] = logp[k];
      b.advantages[i] = adv[k];
      b.returns[i] = ret[k];
    }
    return b;
  }

  void clear() { *this = Rollout{}; }
};

void train_ppo(env::CoverageEnv& env, const TrainConfig& cfg, const TrainHooks& hooks, TrainResult& result) {
  const PpoConfig& pc = cfg.ppo;
  PpoAgent agent(static_cast<int>(env::kObservationSize), env.action_dim(), cfg.hidden, pc, stream_seed(cfg.seed, 0));
  std::mt19937_64 rng(stream_seed(cfg.seed, 2));
  EpisodeDriver driver(env, cfg.seed, hooks, "ppo-train");
  Emitter emit(cfg, hooks, result);
  Window window;
  Rollout roll;
  const long long max_steps = cfg.max_steps();

  emit.checkpoint(0, ppo_checkpoint(cfg, env, agent, 0));
  if (max_steps == 0) return;
  Vec x = driver.reset();
  for (long long step = 1; step <= max_steps; ++step) {
    const auto s = agent.sample(x, rng);
    const auto r = driver.step(s.action, step);
    roll.obs.push_back(x);
    roll.u.push_back(s.u);
    roll.logp.push_back(s.logp);
    roll.seg_rewards.push_back(r.reward);
    roll.seg_values.push_back(s.value);

    const Vec x_next = driver.normalize(r.observation);
    const bool done = r.terminated || r.truncated;
    const bool full = roll.size() >= static_cast<std::size_t>(pc.buffer_size);
    if (done || full || roll.segment_size() >= static_cast<std::size_t>(pc.time_horizon)) {
      roll.close_segment(r.terminated ? 0.0 : agent.value(x_next), pc.gamma, pc.lambda);
    }
    if (done) {
      driver.finish(window, r.info.coverage);
      x = driver.reset();
    } else {
      x = x_next;
    }
    if (full) {
      const auto st = agent.update(roll.batch(), linear_lr(step, max_steps, pc.learning_rate), rng);
      window.add_update(st.policy_loss, st.value_loss, st.entropy);
      roll.clear();
    }
    if (step % cfg.summary_freq == 0) emit.stats(window, step);
    if (step % cfg.checkpoint_freq == 0 || step == max_steps) emit.checkpoint(step, ppo_checkpoint(cfg, env, agent, step));
  }
  result.episodes = driver.episodes();
}

void train_sac(env::CoverageEnv& env, const TrainConfig& cfg, const TrainHooks& hooks, TrainResult& result) {
  const SacConfig& sc = cfg.sac;
  const int act = env.action_dim();
  SacAgent agent(static_cast<int>(env::kObservationSize), act, cfg.hidden, sc, stream_seed(cfg.seed, 0));
  std::mt19937_64 rng(stream_seed(cfg.seed, 2));
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  ReplayBuffer replay(sc.replay_capacity, static_cast<int>(env::kObservationSize), act);
  EpisodeDriver driver(env, cfg.seed, hooks, "sac-train");
  Emitter emit(cfg, hooks, result);
  Window window;
  const long long max_steps = cfg.max_steps();

  emit.checkpoint(0, sac_checkpoint(cfg, env, agent, 0));
  if (max_steps == 0) return;
  Vec x = driver.reset();
  for (long long step = 1; step <= max_steps; ++step) {
    Vec a(act);
    if (step <= sc.warmup_steps) {
      for (int j = 0; j < act; ++j) a[j] = uniform(rng);
    } else {
      a = agent.sample(x, rng);
    }
    const auto r = driver.step(a, step);
    const Vec x_next = driver.normalize(r.observation);
    replay.add({x, a, r.reward, x_next, r.terminated, r.truncated});
    if (r.terminated || r.truncated) {
      driver.finish(window, r.info.coverage);
      x = driver.reset();
    } else {
      x = x_next;
    }
    if (step > sc.warmup_steps && replay.size() >= static_cast<std::size_t>(sc.batch_size) &&
        step % sc.steps_per_update == 0) {
      const auto st = agent.update(replay.sample(sc.batch_size, rng), linear_lr(step, max_steps, sc.learning_rate), rng);
      window.add_update(st.policy_loss, 0.5 * (st.q1_loss + st.q2_loss), st.entropy);
    }
    if (step % cfg.summary_freq == 0) emit.stats(window, step);
    if (step % cfg.checkpoint_freq == 0 || step == max_steps) emit.checkpoint(step, sac_checkpoint(cfg, env, agent, step));
  }
  result.episodes = driver.episodes();
}

}  // namespace

std::string to_string(Algorithm a) { return a == Algorithm::ppo ? "ppo" : "sac"; }

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "ppo") return Algorithm::ppo;
  if (s == "sac") return Algorithm::sac;
  throw std::invalid_argument("unknown algorithm '" + s + "' (expected ppo or sac)");
}

double TrainConfig::learning_rate() const {
  return algorithm == Algorithm::ppo ? ppo.learning_rate : sac.learning_rate;
}
long long TrainConfig::max_steps() const { return algorithm == Algorithm::ppo ? ppo.max_steps : sac.max_steps; }
void TrainConfig::set_learning_rate(double lr) { (algorithm == Algorithm::ppo ? ppo.learning_rate : sac.learning_rate) = lr; }
void TrainConfig::set_max_steps(long long n) { (algorithm == Algorithm::ppo ? ppo.max_steps : sac.max_steps) = n; }

void TrainConfig::validate() const {
  if (hidden.empty()) throw std::invalid_argument("train: at least one hidden layer is required");
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("train: hidden layer sizes must be positive");
  }
  if (summary_freq < 1 || checkpoint_freq < 1) throw std::invalid_argument("train: summary_freq and checkpoint_freq must be positive");
  if (algorithm == Algorithm::ppo) ppo.validate();
  else sac.validate();
}

TrainConfig train_config_from(const KeyValueConfig& kv, TrainConfig c, std::vector<std::string>* warnings) {
  c.algorithm = algorithm_from_string(kv.get_string("train", "algorithm", to_string(c.algorithm)));
  c.seed = static_cast<std::uint64_t>(kv.get_int("train", "seed", static_cast<long long>(c.seed)));
  c.summary_freq = kv.get_int("train", "summary_freq", c.summary_freq);
  c.checkpoint_freq = kv.get_int("train", "checkpoint_freq", c.checkpoint_freq);
  if (kv.has("network", "hidden")) {
    c.hidden.clear();
    for (double h : kv.get_list("network", "hidden", {})) c.hidden.push_back(static_cast<int>(h));
  }
  if (kv.has("network", "hidden_units") || kv.has("network", "num_layers")) {
    const auto units = kv.get_int("network", "hidden_units", c.hidden.empty() ? 128 : c.hidden.front());
    const auto layers = kv.get_int("network", "num_layers", static_cast<long long>(c.hidden.size()));
    c.hidden.assign(static_cast<std::size_t>(std::max(0LL, layers)), static_cast<int>(units));
  }

  auto& p = c.ppo;
  p.batch_size = static_cast<int>(kv.get_int("ppo", "batch_size", p.batch_size));
  p.buffer_size = static_cast<int>(kv.get_int("ppo", "buffer_size", p.buffer_size));
  p.learning_rate = kv.get("ppo", "learning_rate", p.learning_rate);
  p.max_steps = kv.get_int("ppo", "max_steps", p.max_steps);
  p.gamma = kv.get("ppo", "gamma", p.gamma);
  p.lambda = kv.get("ppo", "lambda", p.lambda);
  p.clip_epsilon = kv.get("ppo", "epsilon", p.clip_epsilon);
  p.entropy_beta = kv.get("ppo", "beta", p.entropy_beta);
  p.num_epoch = static_cast<int>(kv.get_int("ppo", "num_epoch", p.num_epoch));
  p.time_horizon = static_cast<int>(kv.get_int("ppo", "time_horizon", p.time_horizon));
  p.value_coef = kv.get("ppo", "value_coef", p.value_coef);
  p.max_grad_norm = kv.get("ppo", "max_grad_norm", p.max_grad_norm);
  p.init_log_std = kv.get("ppo", "init_log_std", p.init_log_std);

  auto& s = c.sac;
  s.batch_size = static_cast<int>(kv.get_int("sac", "batch_size", s.batch_size));
  s.replay_capacity = static_cast<std::size_t>(kv.get_int("sac", "buffer_size", static_cast<long long>(s.replay_capacity)));
  s.learning_rate = kv.get("sac", "learning_rate", s.learning_rate);
  s.max_steps = kv.get_int("sac", "max_steps", s.max_steps);
  s.gamma = kv.get("sac", "gamma", s.gamma);
  s.tau = kv.get("sac", "tau", s.tau);
  s.init_alpha = kv.get("sac", "init_entcoef", s.init_alpha);
  if (kv.has("sac", "target_entropy")) s.target_entropy = kv.get("sac", "target_entropy", 0.0);
  s.warmup_steps = kv.get_int("sac", "warmup_steps", s.warmup_steps);
  s.steps_per_update = static_cast<int>(kv.get_int("sac", "steps_per_update", s.steps_per_update));
  s.init_log_std = kv.get("sac", "init_log_std", s.init_log_std);

  for (const char* section : {"train", "network", "ppo", "sac"}) {
    for (const char* key : {"memory_size", "sequence_length", "use_recurrent"}) {
      if (kv.has(section, key)) {
        kv.get_string(section, key, "");
        if (warnings) {
          warnings->push_back(std::string(section) + "." + key +
                              " is a recurrent-policy setting; policies are feed-forward, ignored");
        }
      }
    }
  }
  c.validate();
  return c;
}

void to_kv(const TrainConfig& c, KeyValueConfig& kv) {
  auto num = [&](const char* sec, const char* key, double v) { kv.set(sec, key, format_double(v)); };
  auto integer = [&](const char* sec, const char* key, long long v) { kv.set(sec, key, std::to_string(v)); };
  kv.set("train", "algorithm", to_string(c.algorithm));
  kv.set("train", "seed", std::to_string(c.seed));
  integer("train", "summary_freq", c.summary_freq);
  integer("train", "checkpoint_freq", c.checkpoint_freq);
  std::string hidden;
  for (std::size_t i = 0; i < c.hidden.size(); ++i) hidden += (i ? ", " : "") + std::to_string(c.hidden[i]);
  kv.set("network", "hidden", hidden);
  integer("ppo", "batch_size", c.ppo.batch_size);
  integer("ppo", "buffer_size", c.ppo.buffer_size);
  num("ppo", "learning_rate", c.ppo.learning_rate);
  integer("ppo", "max_steps", c.ppo.max_steps);
  num("ppo", "gamma", c.ppo.gamma);
  num("ppo", "lambda", c.ppo.lambda);
  num("ppo", "epsilon", c.ppo.clip_epsilon);
  num("ppo", "beta", c.ppo.entropy_beta);
  integer("ppo", "num_epoch", c.ppo.num_epoch);
  integer("ppo", "time_horizon", c.ppo.time_horizon);
  num("ppo", "value_coef", c.ppo.value_coef);
  num("ppo", "max_grad_norm", c.ppo.max_grad_norm);
  num("ppo", "init_log_std", c.ppo.init_log_std);
  integer("sac", "batch_size", c.sac.batch_size);
  integer("sac", "buffer_size", static_cast<long long>(c.sac.replay_capacity));
  num("sac", "learning_rate", c.sac.learning_rate);
  integer("sac", "max_steps", c.sac.max_steps);
  num("sac", "gamma", c.sac.gamma);
  num("sac", "tau", c.sac.tau);
  num("sac", "init_entcoef", c.sac.init_alpha);
  if (c.sac.target_entropy) num("sac", "target_entropy", *c.sac.target_entropy);
  integer("sac", "warmup_steps", c.sac.warmup_steps);
  integer("sac", "steps_per_update", c.sac.steps_per_update);
  num("sac", "init_log_std", c.sac.init_log_std);
}

nlohmann::json to_json(const TrainConfig& c) {
  nlohmann::json sac{{"batch_size", c.sac.batch_size},
                     {"buffer_size", c.sac.replay_capacity},
                     {"learning_rate", c.sac.learning_rate},
                     {"max_steps", c.sac.max_steps},
                     {"gamma", c.sac.gamma},
                     {"tau", c.sac.tau},
                     {"init_entcoef", c.sac.init_alpha},
                     {"warmup_steps", c.sac.warmup_steps},
                     {"steps_per_update", c.sac.steps_per_update},
                     {"init_log_std", c.sac.init_log_std}};
  sac["target_entropy"] = c.sac.target_entropy ? nlohmann::json(*c.sac.target_entropy) : nlohmann::json(nullptr);
  return {{"algorithm", to_string(c.algorithm)},
          {"seed", c.seed},
          {"summary_freq", c.summary_freq},
          {"checkpoint_freq", c.checkpoint_freq},
          {"hidden", c.hidden},
          {"ppo",
           {{"batch_size", c.ppo.batch_size},
            {"buffer_size", c.ppo.buffer_size},
            {"learning_rate", c.ppo.learning_rate},
            {"max_steps", c.ppo.max_steps},
            {"gamma", c.ppo.gamma},
            {"lambda", c.ppo.lambda},
            {"epsilon", c.ppo.clip_epsilon},
            {"beta", c.ppo.entropy_beta},
            {"num_epoch", c.ppo.num_epoch},
            {"time_horizon", c.ppo.time_horizon},
            {"value_coef", c.ppo.value_coef},
            {"max_grad_norm", c.ppo.max_grad_norm},
            {"init_log_std", c.ppo.init_log_std}}},
          {"sac", sac}};
}

std::string to_csv_row(const TrainStats& s) {
  std::ostringstream o;
  o << s.step << ',' << s.episodes << ',' << format_double(s.mean_reward) << ',' << format_double(s.mean_length) << ','
    << format_double(s.mean_coverage) << ',' << format_double(s.policy_loss) << ',' << format_double(s.value_loss)
    << ',' << format_double(s.entropy) << ',' << format_double(s.learning_rate);
  return o.str();
}

TrainResult train(env::CoverageEnv& env, const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  TrainResult result;
  if (cfg.algorithm == Algorithm::ppo) train_ppo(env, cfg, hooks, result);
  else train_sac(env, cfg, hooks, result);
  result.steps = cfg.max_steps();
  result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

PolicyNetwork::PolicyNetwork(const Checkpoint& ckpt) {
  const auto& d = ckpt.descriptor;
  if (d.value("format", std::string{}) != "capscan-policy") throw CheckpointError("checkpoint does not hold a policy");
  algorithm_ = algorithm_from_string(d.at("algorithm").get<std::string>());
  const int obs = d.at("obs_dim").get<int>();
  const int act = d.at("act_dim").get<int>();
  const auto hidden = d.at("hidden").get<std::vector<int>>();
  actor_ = GaussianActor(obs, hidden, act, 0.0);
  const Vec& theta = ckpt.block("actor");
  if (theta.size() != actor_.theta.size()) {
    throw CheckpointError("actor block has " + std::to_string(theta.size()) + " parameters, architecture needs " +
                          std::to_string(actor_.theta.size()));
  }
  actor_.theta = theta;
}

Vec PolicyNetwork::act(const Vec& x) const {
  const Vec mean = actor_.mean(x);
  if (algorithm_ == Algorithm::sac) return mean.array().tanh();
  return mean.cwiseMax(-1.0).cwiseMin(1.0);
}

env::Policy make_eval_policy(const Checkpoint& ckpt, const env::CoverageEnv& env) {
  auto net = std::make_shared<PolicyNetwork>(ckpt);
  if (net->obs_dim() != static_cast<int>(env::kObservationSize) || net->action_dim() != env.action_dim()) {
    throw CheckpointError("checkpoint policy expects obs " + std::to_string(net->obs_dim()) + " / action " +
                          std::to_string(net->action_dim()) + ", environment provides " +
                          std::to_string(env::kObservationSize) + " / " + std::to_string(env.action_dim()));
  }
  const auto normalizer = env.normalizer();
  return [net, normalizer](const env::Observation& o) {
    const Vec a = net->act(normalizer(o));
    return std::vector<double>(a.data(), a.data() + a.size());
  };
}

}  // namespace capscan::learn
