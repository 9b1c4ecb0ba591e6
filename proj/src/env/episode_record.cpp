#include "capscan/env/episode_record.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace capscan::env {

using nlohmann::json;

EpisodeSummary EpisodeRecord::summary() const {
  EpisodeSummary s;
  s.steps = static_cast<int>(steps.size());
  for (const auto& st : steps) s.total_reward += st.reward;
  if (!steps.empty()) {
    s.final_coverage = steps.back().coverage;
    s.final_time = steps.back().sim_time;
    if (steps.back().terminated) s.termination = "terminated:" + std::string(dynamics::to_string(steps.back().violation));
    else if (steps.back().truncated) s.termination = "truncated";
    else s.termination = "incomplete";
  } else {
    s.termination = "incomplete";
  }
  for (double t : kReportTimes) s.samples.push_back(coverage_at(steps, t));
  return s;
}

std::optional<CoverageSample> coverage_at(const std::vector<StepLog>& steps, double target) {
  for (const auto& st : steps) {
    if (st.sim_time >= target) return CoverageSample{target, st.sim_time, st.coverage};
  }
  return std::nullopt;
}

StepLog make_step_log(const CoverageEnv& env, std::span<const double> action, const StepResult& result) {
  StepLog log;
  log.step = env.step_count();
  log.sim_time = env.sim_time();
  log.action.assign(action.begin(), action.end());
  log.reward = result.reward;
  log.coverage = result.info.coverage;
  log.diff_coverage = result.info.diff_coverage;
  log.new_vertices = result.info.new_vertices.size();
  log.violation = result.info.violation;
  log.terminated = result.terminated;
  log.truncated = result.truncated;
  return log;
}

json to_json(const EpisodeSummary& s) {
  json samples = json::array();
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    if (s.samples[i]) {
      samples.push_back({{"target", s.samples[i]->target_time},
                         {"sim_time", s.samples[i]->sim_time},
                         {"coverage", s.samples[i]->coverage}});
    } else {
      samples.push_back({{"target", kReportTimes[i]}, {"sim_time", nullptr}, {"coverage", nullptr}});
    }
  }
  return {{"final_coverage", s.final_coverage}, {"final_time", s.final_time},   {"steps", s.steps},
          {"total_reward", s.total_reward},     {"termination", s.termination}, {"coverage_at", samples}};
}

json header_json(const EpisodeRecord& r) {
  json h{{"type", "header"},
         {"format", kRecordFormat},
         {"version", kRecordVersion},
         {"controller", r.controller},
         {"seed", r.episode.seed},
         {"max_steps", r.episode.max_steps},
         {"env", to_json(r.env)}};
  h["spawn_position"] = r.episode.spawn_position
                            ? json::array({r.episode.spawn_position->x(), r.episode.spawn_position->y(),
                                           r.episode.spawn_position->z()})
                            : json(nullptr);
  h["spawn_yaw"] = r.episode.spawn_yaw ? json(*r.episode.spawn_yaw) : json(nullptr);
  return h;
}

json to_json(const StepLog& s) {
  return {{"type", "step"},
          {"step", s.step},
          {"sim_time", s.sim_time},
          {"action", s.action},
          {"reward", s.reward},
          {"coverage", s.coverage},
          {"diff", s.diff_coverage},
          {"new_vertices", s.new_vertices},
          {"violation", std::string(dynamics::to_string(s.violation))},
          {"terminated", s.terminated},
          {"truncated", s.truncated}};
}

StepLog step_log_from_json(const json& j) {
  StepLog s;
  s.step = j.at("step").get<int>();
  s.sim_time = j.at("sim_time").get<double>();
  s.action = j.at("action").get<std::vector<double>>();
  s.reward = j.at("reward").get<double>();
  s.coverage = j.at("coverage").get<double>();
  s.diff_coverage = j.value("diff", 0.0);
  s.new_vertices = j.value("new_vertices", std::size_t{0});
  s.violation = dynamics::violation_from_string(j.at("violation").get<std::string>());
  s.terminated = j.at("terminated").get<bool>();
  s.truncated = j.at("truncated").get<bool>();
  return s;
}

void write_jsonl(std::ostream& out, const EpisodeRecord& record) {
  out << header_json(record).dump() << '\n';
  for (const auto& s : record.steps) out << to_json(s).dump() << '\n';
  json summary = to_json(record.summary());
  summary["type"] = "summary";
  out << summary.dump() << '\n';
}

void write_jsonl(const std::filesystem::path& path, const EpisodeRecord& record) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write episode record " + path.string());
  write_jsonl(out, record);
}

EpisodeRecord read_jsonl(std::istream& in) {
  EpisodeRecord r;
  std::string line;
  int line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error("episode record line " + std::to_string(line_no) + ": " + e.what());
    }
    const auto type = j.value("type", std::string{});
    if (type == "header") {
      if (j.value("format", std::string{}) != kRecordFormat) throw std::runtime_error("not a capscan episode record");
      if (j.value("version", 0) != kRecordVersion) {
        throw std::runtime_error("unsupported episode record version " + std::to_string(j.value("version", 0)));
      }
      r.controller = j.value("controller", std::string{});
      r.episode.seed = j.at("seed").get<std::uint64_t>();
      r.episode.max_steps = j.at("max_steps").get<int>();
      if (!j.at("spawn_position").is_null()) {
        const auto& p = j.at("spawn_position");
        r.episode.spawn_position = Vec3(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
      }
      if (!j.at("spawn_yaw").is_null()) r.episode.spawn_yaw = j.at("spawn_yaw").get<double>();
      r.env = env_config_from_json(j.at("env"));
      header = true;
    } else if (type == "step") {
      if (!header) throw std::runtime_error("episode record step before header");
      r.steps.push_back(step_log_from_json(j));
    }
  }
  if (!header) throw std::runtime_error("episode record has no header");
  return r;
}

EpisodeRecord read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open episode record " + path.string());
  return read_jsonl(in);
}

EpisodeRecord run_episode(CoverageEnv& env, const Policy& policy, const EpisodeConfig& episode,
                          const std::string& controller) {
  const auto start = std::chrono::steady_clock::now();
  EpisodeRecord record;
  record.env = env.config();
  record.episode = episode;
  record.controller = controller;
  auto obs = env.reset(episode);
  for (;;) {
    const auto action = policy(obs);
    for (std::size_t i = 0; i < action.size(); ++i) {
      if (!std::isfinite(action[i])) {
        std::ostringstream msg;
        msg << "policy produced non-finite action component " << i << " at step " << env.step_count() + 1;
        throw ContractError(msg.str());
      }
    }
    const auto result = env.step(action);
    record.steps.push_back(make_step_log(env, action, result));
    obs = result.observation;
    if (result.terminated || result.truncated) break;
  }
  record.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

}  // namespace capscan::env
