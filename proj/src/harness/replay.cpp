#include "capscan/harness/replay.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "capscan/common/config.hpp"
#include "capscan/geometry/mesh_io.hpp"

namespace capscan::harness {

namespace fs = std::filesystem;

namespace {

std::optional<Divergence> compare(const env::StepLog& rec, const env::StepLog& sim) {
  auto diff = [&](const char* field, const std::string& a, const std::string& b) {
    return Divergence{rec.step, field, a, b};
  };
  auto num = [&](const char* field, double a, double b) -> std::optional<Divergence> {
    // Bitwise equality; the JSONL writer round-trips doubles exactly.
    if (a == b || (a != a && b != b)) return std::nullopt;
    return diff(field, format_double(a), format_double(b));
  };
  if (rec.step != sim.step) return diff("step", std::to_string(rec.step), std::to_string(sim.step));
  if (auto d = num("sim_time", rec.sim_time, sim.sim_time)) return d;
  if (auto d = num("reward", rec.reward, sim.reward)) return d;
  if (auto d = num("coverage", rec.coverage, sim.coverage)) return d;
  if (auto d = num("diff", rec.diff_coverage, sim.diff_coverage)) return d;
  if (rec.new_vertices != sim.new_vertices) {
    return diff("new_vertices", std::to_string(rec.new_vertices), std::to_string(sim.new_vertices));
  }
  if (rec.violation != sim.violation) {
    return diff("violation", std::string(dynamics::to_string(rec.violation)),
                std::string(dynamics::to_string(sim.violation)));
  }
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  if (rec.terminated != sim.terminated) return diff("terminated", flag(rec.terminated), flag(sim.terminated));
  if (rec.truncated != sim.truncated) return diff("truncated", flag(rec.truncated), flag(sim.truncated));
  return std::nullopt;
}

std::string snapshot_name(double t) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "coverage_t%07.2f.ply", t);
  return buf;
}

}  // namespace

ReplayReport replay(const env::EpisodeRecord& record, const ReplayOptions& opt) {
  ReplayReport report;
  auto scene = opt.scene ? opt.scene : env::make_scene(record.env.phantom);
  env::CoverageEnv env(record.env, scene);
  env.reset(record.episode);

  std::vector<double> times = opt.snapshot_times;
  std::sort(times.begin(), times.end());
  std::size_t next_snapshot = 0;

  const bool write = !opt.out_dir.empty();
  std::ofstream csv;
  if (write) {
    fs::create_directories(opt.out_dir);
    report.coverage_csv = opt.out_dir / "coverage.csv";
    csv.open(report.coverage_csv, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + report.coverage_csv.string());
    csv << "step,sim_time,coverage,reward\n";
  }

  for (const auto& logged : record.steps) {
    if (env.done()) {
      report.divergence = Divergence{logged.step, "episode_end", "step present", "episode already ended"};
      break;
    }
    env::StepResult result;
    try {
      result = env.step(logged.action);
    } catch (const std::invalid_argument& e) {
      report.divergence = Divergence{logged.step, "action", "logged action", e.what()};
      break;
    }
    const auto sim = env::make_step_log(env, logged.action, result);
    report.steps_checked += 1;
    if (auto d = compare(logged, sim)) {
      report.divergence = std::move(d);
      break;
    }
    if (write) {
      csv << sim.step << ',' << format_double(sim.sim_time) << ',' << format_double(sim.coverage) << ','
          << format_double(sim.reward) << '\n';
    }
    while (next_snapshot < times.size() && sim.sim_time >= times[next_snapshot]) {
      Snapshot snap;
      snap.target_time = times[next_snapshot];
      snap.sim_time = sim.sim_time;
      snap.coverage = sim.coverage;
      snap.visited = env.tracker().visible_count();
      if (write) {
        snap.path = opt.out_dir / snapshot_name(snap.target_time);
        const auto colors = geometry::coverage_colors(env.tracker().visited());
        geometry::save_ply(snap.path, env.scene().mesh, &colors);
      }
      report.snapshots.push_back(std::move(snap));
      ++next_snapshot;
    }
  }
  return report;
}

std::string describe(const Divergence& d) {
  std::ostringstream s;
  s << "divergence at step " << d.step << ": " << d.field << " recorded " << d.recorded << ", re-simulated "
    << d.replayed;
  return s.str();
}

}  // namespace capscan::harness
