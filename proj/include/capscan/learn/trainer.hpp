#pragma once

#include <functional>
#include <string>
#include <vector>

#include "capscan/common/config.hpp"
#include "capscan/env/coverage_env.hpp"
#include "capscan/env/episode_record.hpp"
#include "capscan/learn/checkpoint.hpp"
#include "capscan/learn/ppo.hpp"
#include "capscan/learn/sac.hpp"

namespace capscan::learn {

enum class Algorithm { ppo, sac };
std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct TrainConfig {
  Algorithm algorithm = Algorithm::ppo;
  PpoConfig ppo;
  SacConfig sac;
  std::vector<int> hidden{128, 128};
  std::uint64_t seed = 0;
  long long summary_freq = 10'000;
  long long checkpoint_freq = 100'000;

  double learning_rate() const;
  long long max_steps() const;
  void set_learning_rate(double lr);
  void set_max_steps(long long n);
  void validate() const;
};

// Reads [train], [network], [ppo] and [sac] sections. Recurrent-policy keys
// (memory_size, sequence_length, use_recurrent) are accepted and ignored
// with a warning appended to `warnings`.
TrainConfig train_config_from(const KeyValueConfig& kv, TrainConfig base = {},
                              std::vector<std::string>* warnings = nullptr);
nlohmann::json to_json(const TrainConfig& cfg);
// Writes every field into the [train], [network], [ppo] and [sac] sections.
void to_kv(const TrainConfig& cfg, KeyValueConfig& kv);

struct TrainStats {
  long long step = 0;
  int episodes = 0;  // episodes finished inside the window
  double mean_reward = 0.0;
  double mean_length = 0.0;
  double mean_coverage = 0.0;  // final coverage of those episodes
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double learning_rate = 0.0;
};

inline constexpr const char* kTrainStatsHeader =
    "step,episodes,mean_reward,mean_episode_length,mean_final_coverage,policy_loss,value_loss,entropy,learning_rate";
std::string to_csv_row(const TrainStats& s);

struct TrainHooks {
  std::function<void(const TrainStats&)> on_stats;
  std::function<void(const env::EpisodeRecord&)> on_episode;
  std::function<void(long long step, const Checkpoint&)> on_checkpoint;
};

struct TrainResult {
  std::vector<TrainStats> stats;
  long long steps = 0;
  int episodes = 0;
  Checkpoint final_checkpoint;
  double wall_time_s = 0.0;
};

// Single-instance rollout/update loop. Emits stats every summary_freq env
// steps and checkpoints at step 0, every checkpoint_freq steps and at the
// end. Environment failures are rethrown as std::runtime_error naming the
// step.
TrainResult train(env::CoverageEnv& env, const TrainConfig& cfg, const TrainHooks& hooks = {});

// Deterministic policy stored in a checkpoint: clip(mean) for PPO,
// tanh(mean) for SAC, applied to normalized observations.
class PolicyNetwork {
 public:
  explicit PolicyNetwork(const Checkpoint& ckpt);

  Vec act(const Vec& normalized_obs) const;
  Algorithm algorithm() const { return algorithm_; }
  int obs_dim() const { return actor_.mlp.input_dim(); }
  int action_dim() const { return actor_.action_dim; }

 private:
  Algorithm algorithm_;
  GaussianActor actor_;
};

// Throws CheckpointError when the checkpoint does not fit the environment.
env::Policy make_eval_policy(const Checkpoint& ckpt, const env::CoverageEnv& env);

}  // namespace capscan::learn
