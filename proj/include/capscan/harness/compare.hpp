#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "capscan/env/episode_record.hpp"
#include "capscan/learn/checkpoint.hpp"

namespace capscan::harness {

inline constexpr const char* kCompareCsvHeader = "row,target_time,manual_time,manual_coverage,drl_time,drl_coverage";

struct ControllerColumn {
  std::string controller;
  std::vector<std::optional<env::CoverageSample>> at;  // one per env::kReportTimes, empty when not reached
  double final_coverage = 0.0;
  double final_time = 0.0;
};

struct CompareReport {
  std::vector<double> times;  // env::kReportTimes
  ControllerColumn manual;
  ControllerColumn drl;
};

ControllerColumn column_from(const env::EpisodeRecord& record);
CompareReport make_compare_report(const env::EpisodeRecord& manual, const env::EpisodeRecord& drl);

// Runs the checkpoint's deterministic policy in the manual record's
// environment and episode (seed replaced when given), then tabulates both.
CompareReport compare_with_checkpoint(const env::EpisodeRecord& manual, const learn::Checkpoint& ckpt,
                                      std::optional<std::uint64_t> seed = std::nullopt,
                                      env::EpisodeRecord* drl_record = nullptr);

// Missing cells print as "n/a".
void write_compare_csv(std::ostream& out, const CompareReport& r);
void write_compare_text(std::ostream& out, const CompareReport& r);

}  // namespace capscan::harness
