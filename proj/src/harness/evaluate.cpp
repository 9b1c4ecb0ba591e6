#include "capscan/harness/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include "capscan/learn/trainer.hpp"

namespace capscan::harness {

namespace fs = std::filesystem;

EvalSummary evaluate(env::CoverageEnv& env, const env::Policy& policy, const std::string& controller, int episodes,
                     std::uint64_t seed, std::vector<env::EpisodeRecord>* records) {
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  EvalSummary s;
  s.controller = controller;
  s.seed = seed;
  s.episodes = episodes;
  for (double t : env::kReportTimes) s.coverage_at.push_back({t, 0, 0.0});

  double sum = 0.0;
  double sum_len = 0.0;
  std::vector<double> finals;
  for (int i = 0; i < episodes; ++i) {
    env::EpisodeConfig ep;
    ep.seed = seed + static_cast<std::uint64_t>(i);
    ep.max_steps = env.config().max_steps;
    env::EpisodeRecord rec = env::run_episode(env, policy, ep, controller);
    env::EpisodeSummary summary = rec.summary();
    finals.push_back(summary.final_coverage);
    sum += summary.final_coverage;
    sum_len += summary.steps;
    for (std::size_t k = 0; k < s.coverage_at.size(); ++k) {
      if (summary.samples[k]) {
        s.coverage_at[k].reached += 1;
        s.coverage_at[k].mean += summary.samples[k]->coverage;
      }
    }
    s.per_episode.push_back(std::move(summary));
    if (records) records->push_back(std::move(rec));
  }
  s.mean_final_coverage = sum / episodes;
  s.mean_episode_length = sum_len / episodes;
  if (episodes > 1) {
    double ss = 0.0;
    for (double f : finals) ss += (f - s.mean_final_coverage) * (f - s.mean_final_coverage);
    s.std_final_coverage = std::sqrt(ss / (episodes - 1));
  }
  for (auto& c : s.coverage_at) {
    c.mean = c.reached > 0 ? c.mean / c.reached : std::nan("");
  }
  return s;
}

EvalSummary evaluate_checkpoint(const learn::Checkpoint& ckpt, env::CoverageEnv& env, int episodes, std::uint64_t seed,
                                std::vector<env::EpisodeRecord>* records) {
  const auto policy = learn::make_eval_policy(ckpt, env);
  const std::string algo = ckpt.descriptor.value("algorithm", "policy");
  return evaluate(env, policy, algo + "-eval", episodes, seed, records);
}

env::Policy random_policy(int action_dim, std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [rng, action_dim](const env::Observation&) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(static_cast<std::size_t>(action_dim));
    for (auto& x : a) x = u(*rng);
    return a;
  };
}

env::EnvConfig checkpoint_env(const learn::Checkpoint& ckpt) {
  if (!ckpt.descriptor.contains("env")) throw learn::CheckpointError("checkpoint carries no environment config");
  return env::env_config_from_json(ckpt.descriptor.at("env"));
}

nlohmann::json to_json(const EvalSummary& s) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json at = nlohmann::json::array();
  for (const auto& c : s.coverage_at) {
    at.push_back({{"time", c.target_time}, {"episodes_reached", c.reached}, {"mean_coverage", num(c.mean)}});
  }
  return {{"format", kEvalFormat},
          {"version", kEvalVersion},
          {"controller", s.controller},
          {"seed", s.seed},
          {"episodes", s.episodes},
          {"mean_final_coverage", s.mean_final_coverage},
          {"std_final_coverage", s.std_final_coverage},
          {"mean_episode_length", s.mean_episode_length},
          {"coverage_at", at}};
}

void write_eval(const fs::path& dir, const EvalSummary& s, const std::vector<env::EpisodeRecord>* records) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "summary.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
    out << to_json(s).dump(2) << '\n';
  }
  std::ofstream lines(dir / "episodes.jsonl", std::ios::binary);
  if (!lines) throw std::runtime_error("cannot write " + (dir / "episodes.jsonl").string());
  for (std::size_t i = 0; i < s.per_episode.size(); ++i) {
    nlohmann::json j = env::to_json(s.per_episode[i]);
    j["episode"] = i;
    j["seed"] = s.seed + i;
    lines << j.dump() << '\n';
  }
  if (records) {
    fs::create_directories(dir / "records");
    for (std::size_t i = 0; i < records->size(); ++i) {
      char name[40];
      std::snprintf(name, sizeof name, "episode_%04zu.jsonl", i);
      env::write_jsonl(dir / "records" / name, (*records)[i]);
    }
  }
}

}  // namespace capscan::harness
