#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "capscan/env/episode_record.hpp"
#include "capscan/learn/checkpoint.hpp"
#include "json.hpp"

namespace capscan::harness {

inline constexpr const char* kEvalFormat = "capscan-eval";
inline constexpr int kEvalVersion = 1;

struct CoverageAtTime {
  double target_time = 0.0;
  int reached = 0;  // episodes that lasted long enough
  double mean = 0.0;
};

struct EvalSummary {
  std::string controller;
  std::uint64_t seed = 0;
  int episodes = 0;
  double mean_final_coverage = 0.0;
  double std_final_coverage = 0.0;  // sample standard deviation, 0 for one episode
  double mean_episode_length = 0.0;
  std::vector<CoverageAtTime> coverage_at;  // one per env::kReportTimes
  std::vector<env::EpisodeSummary> per_episode;
};

// Episode i uses seed + i.
EvalSummary evaluate(env::CoverageEnv& env, const env::Policy& policy, const std::string& controller, int episodes,
                     std::uint64_t seed, std::vector<env::EpisodeRecord>* records = nullptr);

EvalSummary evaluate_checkpoint(const learn::Checkpoint& ckpt, env::CoverageEnv& env, int episodes, std::uint64_t seed,
                                std::vector<env::EpisodeRecord>* records = nullptr);

// Uniform actions in [-1, 1] from its own generator.
env::Policy random_policy(int action_dim, std::uint64_t seed);

// The environment a checkpoint was trained in.
env::EnvConfig checkpoint_env(const learn::Checkpoint& ckpt);

nlohmann::json to_json(const EvalSummary& s);

// summary.json plus episodes.jsonl (one summary line per episode); full
// step records go to records/ when given.
void write_eval(const std::filesystem::path& dir, const EvalSummary& s,
                const std::vector<env::EpisodeRecord>* records = nullptr);

}  // namespace capscan::harness
