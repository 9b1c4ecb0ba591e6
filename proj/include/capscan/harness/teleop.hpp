#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capscan/env/episode_record.hpp"
#include "json.hpp"

namespace capscan::harness {

inline constexpr int kProtocolVersion = 1;
inline constexpr const char* kManualController = "manual";

struct TeleopOptions {
  env::EnvConfig env;
  std::shared_ptr<const env::Scene> scene;  // built from env.phantom when null
  std::filesystem::path record_dir = "teleop_records";
  std::string session_id = "session";
};

// One client's simulation, independent of the transport. Every inbound text
// frame yields the frames to send back, in order. Lockstep: one state frame
// per accepted action. Bad frames produce an error frame and leave the
// session as it was.
class TeleopSession {
 public:
  explicit TeleopSession(TeleopOptions opt);

  std::vector<std::string> handle(std::string_view frame);

  // Flushes steps not yet saved to a record file; returns its path. Called
  // on disconnect, and by reset before a new episode starts.
  std::optional<std::filesystem::path> flush();

  bool greeted() const { return greeted_; }
  bool in_episode() const { return record_.has_value(); }
  const env::CoverageEnv& environment() const { return env_; }
  const std::vector<std::filesystem::path>& written() const { return written_; }

 private:
  nlohmann::json on_hello(const nlohmann::json& msg);
  nlohmann::json on_reset(const nlohmann::json& msg);
  nlohmann::json on_action(const nlohmann::json& msg);
  nlohmann::json on_save();
  nlohmann::json state_frame(const env::StepResult* result) const;
  std::filesystem::path write_record(std::string* id);

  TeleopOptions opt_;
  env::CoverageEnv env_;
  bool greeted_ = false;
  std::optional<env::EpisodeRecord> record_;
  std::size_t saved_steps_ = 0;
  int next_file_ = 0;
  std::vector<std::filesystem::path> written_;
};

nlohmann::json error_frame(const std::string& msg);

}  // namespace capscan::harness
