#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "capscan/env/coverage_env.hpp"
#include "json.hpp"

namespace capscan::env {

inline constexpr const char* kRecordFormat = "capscan-episode";
inline constexpr int kRecordVersion = 1;

// Sim times at which coverage is reported, seconds.
inline constexpr std::array<double, 3> kReportTimes{60.0, 120.0, 150.0};

struct StepLog {
  int step = 0;
  double sim_time = 0.0;
  std::vector<double> action;
  double reward = 0.0;
  double coverage = 0.0;
  double diff_coverage = 0.0;
  std::size_t new_vertices = 0;
  dynamics::Violation violation = dynamics::Violation::none;
  bool terminated = false;
  bool truncated = false;
};

struct CoverageSample {
  double target_time = 0.0;
  double sim_time = 0.0;  // first step time at or past the target
  double coverage = 0.0;
};

struct EpisodeSummary {
  double final_coverage = 0.0;
  double final_time = 0.0;
  int steps = 0;
  double total_reward = 0.0;
  std::string termination;  // "truncated", "terminated:<violation>" or "incomplete"
  std::vector<std::optional<CoverageSample>> samples;  // one per kReportTimes
};

struct EpisodeRecord {
  EnvConfig env;
  EpisodeConfig episode;
  std::string controller;
  std::vector<StepLog> steps;
  double wall_time_s = 0.0;  // not serialized into the JSONL record

  EpisodeSummary summary() const;
};

// Coverage at the first step whose sim time reaches `target`.
std::optional<CoverageSample> coverage_at(const std::vector<StepLog>& steps, double target);

StepLog make_step_log(const CoverageEnv& env, std::span<const double> action, const StepResult& result);

nlohmann::json to_json(const EpisodeSummary& s);
nlohmann::json header_json(const EpisodeRecord& r);
nlohmann::json to_json(const StepLog& s);
StepLog step_log_from_json(const nlohmann::json& j);

// JSON-lines: header line, one line per step, closing summary line.
void write_jsonl(const std::filesystem::path& path, const EpisodeRecord& record);
void write_jsonl(std::ostream& out, const EpisodeRecord& record);
EpisodeRecord read_jsonl(const std::filesystem::path& path);
EpisodeRecord read_jsonl(std::istream& in);

using Policy = std::function<std::vector<double>(const Observation&)>;

// observe -> act -> step until the episode ends. Throws ContractError when
// the policy emits a non-finite action.
EpisodeRecord run_episode(CoverageEnv& env, const Policy& policy, const EpisodeConfig& episode,
                          const std::string& controller = "policy");

}  // namespace capscan::env
