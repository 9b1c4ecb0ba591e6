#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "capscan/env/episode_record.hpp"

namespace capscan::harness {

struct Divergence {
  int step = 0;  // 1-based step number as written in the record
  std::string field;
  std::string recorded;
  std::string replayed;
};

struct Snapshot {
  double target_time = 0.0;
  double sim_time = 0.0;
  double coverage = 0.0;
  std::size_t visited = 0;
  std::filesystem::path path;
};

struct ReplayOptions {
  std::vector<double> snapshot_times;       // sim seconds; first step at or past each
  std::filesystem::path out_dir;            // PLY snapshots and coverage.csv; nothing written when empty
  std::shared_ptr<const env::Scene> scene;  // reused instead of rebuilding the phantom
};

struct ReplayReport {
  int steps_checked = 0;
  std::optional<Divergence> divergence;
  std::vector<Snapshot> snapshots;
  std::filesystem::path coverage_csv;

  bool ok() const { return !divergence.has_value(); }
};

// Re-simulates from the recorded config, seed and spawn, feeding the
// recorded actions, and compares every logged field bit for bit. Stops at
// the first divergence.
ReplayReport replay(const env::EpisodeRecord& record, const ReplayOptions& opt = {});

std::string describe(const Divergence& d);

}  // namespace capscan::harness
