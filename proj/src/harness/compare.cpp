#include "capscan/harness/compare.hpp"

#include <cstdio>

#include "capscan/common/config.hpp"
#include "capscan/learn/trainer.hpp"

namespace capscan::harness {

namespace {

std::string fixed(double v, const char* fmt) {
  char buf[48];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string cell_time(const std::optional<env::CoverageSample>& s) { return s ? format_double(s->sim_time) : "n/a"; }
std::string cell_coverage(const std::optional<env::CoverageSample>& s) {
  return s ? format_double(s->coverage) : "n/a";
}

}  // namespace

ControllerColumn column_from(const env::EpisodeRecord& record) {
  ControllerColumn c;
  c.controller = record.controller;
  for (double t : env::kReportTimes) c.at.push_back(env::coverage_at(record.steps, t));
  if (!record.steps.empty()) {
    c.final_coverage = record.steps.back().coverage;
    c.final_time = record.steps.back().sim_time;
  }
  return c;
}

CompareReport make_compare_report(const env::EpisodeRecord& manual, const env::EpisodeRecord& drl) {
  CompareReport r;
  r.times.assign(env::kReportTimes.begin(), env::kReportTimes.end());
  r.manual = column_from(manual);
  r.drl = column_from(drl);
  return r;
}

CompareReport compare_with_checkpoint(const env::EpisodeRecord& manual, const learn::Checkpoint& ckpt,
                                      std::optional<std::uint64_t> seed, env::EpisodeRecord* drl_record) {
  env::CoverageEnv env(manual.env);
  const auto policy = learn::make_eval_policy(ckpt, env);
  env::EpisodeConfig ep = manual.episode;
  if (seed) ep.seed = *seed;
  const std::string algo = ckpt.descriptor.value("algorithm", "policy");
  env::EpisodeRecord drl = env::run_episode(env, policy, ep, algo + "-eval");
  CompareReport r = make_compare_report(manual, drl);
  if (drl_record) *drl_record = std::move(drl);
  return r;
}

void write_compare_csv(std::ostream& out, const CompareReport& r) {
  out << kCompareCsvHeader << '\n';
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    out << format_double(r.times[i]) << ',' << format_double(r.times[i]) << ',' << cell_time(r.manual.at[i]) << ','
        << cell_coverage(r.manual.at[i]) << ',' << cell_time(r.drl.at[i]) << ',' << cell_coverage(r.drl.at[i]) << '\n';
  }
  out << "final,n/a," << format_double(r.manual.final_time) << ',' << format_double(r.manual.final_coverage) << ','
      << format_double(r.drl.final_time) << ',' << format_double(r.drl.final_coverage) << '\n';
}

void write_compare_text(std::ostream& out, const CompareReport& r) {
  auto cov = [](const std::optional<env::CoverageSample>& s) {
    return s ? fixed(s->coverage, "%.2f%%") : std::string("n/a");
  };
  char line[160];
  out << "Comparison between manual and DRL-based control\n";
  std::snprintf(line, sizeof line, "%-16s %-18s %s\n", "Time", "Manual Control", "DRL-based Control");
  out << line;
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    const auto& m = r.manual.at[i];
    const auto& d = r.drl.at[i];
    // Both columns advance on the same step length, so either reading names the row.
    const double t = m ? m->sim_time : d ? d->sim_time : r.times[i];
    const std::string label = (m || d) ? fixed(t, "%.2f seconds") : fixed(r.times[i], "%.0f s (n/a)");
    std::snprintf(line, sizeof line, "%-16s %-18s %s\n", label.c_str(), cov(m).c_str(), cov(d).c_str());
    out << line;
  }
  const std::string mf = fixed(r.manual.final_coverage, "%.2f%%") + fixed(r.manual.final_time, " @ %.1f s");
  const std::string df = fixed(r.drl.final_coverage, "%.2f%%") + fixed(r.drl.final_time, " @ %.1f s");
  std::snprintf(line, sizeof line, "%-16s %-18s %s\n", "Final", mf.c_str(), df.c_str());
  out << line;
}

}  // namespace capscan::harness
