#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "capscan/common/config.hpp"
#include "capscan/env/env_config.hpp"
#include "capscan/learn/trainer.hpp"
#include "json.hpp"

namespace capscan::harness {

inline constexpr const char* kManifestFormat = "capscan-run";
inline constexpr int kManifestVersion = 1;
inline constexpr int kStatsCsvVersion = 1;
inline constexpr int kConfigVersion = 1;
inline constexpr const char* kCurvesHeader = "lr,step,reward,policy_loss,value_loss,entropy";

// Environment and training settings read from one plain-text config.
struct RunConfig {
  env::EnvConfig env;
  learn::TrainConfig train;
};

// Unknown keys and ignored recurrent-policy keys are appended to `warnings`.
RunConfig load_run_config(const KeyValueConfig& kv, std::vector<std::string>* warnings = nullptr);
RunConfig load_run_config(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

// Every effective setting, in the form load_run_config reads back.
KeyValueConfig snapshot(const RunConfig& cfg);

// Git blob hash: SHA-1 over "blob <size>\0" followed by the text.
std::string git_blob_hash(const std::string& text);

struct RunManifest {
  std::string run_id;
  learn::Algorithm algorithm = learn::Algorithm::ppo;
  std::uint64_t seed = 0;
  double learning_rate = 0.0;
  long long max_steps = 0;
  std::string config_text;  // snapshot().dump()
  std::string config_hash;
  std::string output_dir;
};

RunManifest make_manifest(const RunConfig& cfg, const std::filesystem::path& out_dir, std::string run_id = {});
nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
RunManifest read_manifest(const std::filesystem::path& run_dir);

struct RunOptions {
  std::string run_id;            // derived from the config when empty
  bool record_episodes = false;  // episodes/episode_NNNNNN.jsonl
  std::ostream* log = nullptr;   // progress lines
};

struct RunOutcome {
  RunManifest manifest;
  std::filesystem::path dir;
  learn::TrainResult result;
};

// Run directory:
//   manifest.json          written before the first training step
//   config.cfg             the snapshot the manifest hashes
//   stats.csv              one TrainStats row per summary window
//   checkpoints/step_NNNNNNNNN.ckpt, final.ckpt
//   summary.json           written when training finishes
// Refuses to reuse a directory that already holds a manifest.
RunOutcome run_training(const RunConfig& cfg, const std::filesystem::path& out_dir, const RunOptions& opt = {});

std::string checkpoint_name(long long step);

struct SweepOutcome {
  std::vector<RunOutcome> runs;
  std::filesystem::path curves;
};

// One run directory per learning rate under `out_root` plus curves.csv in
// long format (one row per lr and summary step).
SweepOutcome run_sweep(const RunConfig& cfg, const std::vector<double>& learning_rates,
                       const std::filesystem::path& out_root, const RunOptions& opt = {});

std::string sweep_dir_name(double lr);

}  // namespace capscan::harness
