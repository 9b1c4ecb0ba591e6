#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "capscan/geometry/mesh_io.hpp"
#include "capscan/geometry/phantom.hpp"
#include "capscan/harness/compare.hpp"
#include "capscan/harness/evaluate.hpp"
#include "capscan/harness/replay.hpp"
#include "capscan/harness/run.hpp"
#include "capscan/harness/server.hpp"

using namespace capscan;
using namespace capscan::harness;
namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_interrupted{false};
void on_signal(int) { g_interrupted = true; }

struct TrainArgs {
  std::string algo;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> lr;
  std::optional<long long> max_steps;
  std::string sweep;
  bool record_episodes = false;
  bool quiet = false;
};

struct EvalArgs {
  std::string checkpoint;
  std::string config;
  int episodes = 10;
  std::uint64_t seed = 1000;
  std::string out = "eval";
  bool random = false;
  bool records = false;
};

struct ReplayArgs {
  std::string record;
  std::string out = "replay";
  std::vector<double> at{60.0, 120.0, 150.0};
};

struct CompareArgs {
  std::string manual;
  std::string checkpoint;
  std::optional<std::uint64_t> seed;
  std::string out = "compare";
};

struct ServeArgs {
  std::string address = "127.0.0.1";
  unsigned short port = 8765;
  std::string config;
  std::string records = "teleop_records";
};

struct PhantomArgs {
  std::string kind = "stomach";
  std::string out = "data/stomach_phantom.ply";
  std::size_t vertices = 2000;
  double radius = 0.05;
};

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

RunConfig base_config(const std::string& path) {
  std::vector<std::string> warnings;
  RunConfig cfg =
      path.empty() ? load_run_config(KeyValueConfig{}, &warnings) : load_run_config(fs::path(path), &warnings);
  print_warnings(warnings);
  return cfg;
}

std::vector<double> parse_sweep(const std::string& spec) {
  const std::string prefix = "lr=";
  if (spec.rfind(prefix, 0) != 0) throw std::invalid_argument("--sweep expects lr=a,b,...");
  std::vector<double> lrs;
  std::stringstream in(spec.substr(prefix.size()));
  for (std::string item; std::getline(in, item, ',');) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw std::invalid_argument("bad learning rate '" + item + "' in --sweep");
    lrs.push_back(v);
  }
  if (lrs.empty()) throw std::invalid_argument("--sweep lists no learning rates");
  return lrs;
}

int cmd_train(const TrainArgs& a) {
  RunConfig cfg = base_config(a.config);
  if (!a.algo.empty()) cfg.train.algorithm = learn::algorithm_from_string(a.algo);
  if (a.seed) cfg.train.seed = *a.seed;
  if (a.lr) cfg.train.set_learning_rate(*a.lr);
  if (a.max_steps) cfg.train.set_max_steps(*a.max_steps);
  cfg.env.validate();
  cfg.train.validate();

  RunOptions opt;
  opt.record_episodes = a.record_episodes;
  opt.log = a.quiet ? nullptr : &std::cout;
  if (!a.sweep.empty()) {
    const auto lrs = parse_sweep(a.sweep);
    const fs::path root =
        a.out.empty() ? fs::path("runs") / ("sweep-" + learn::to_string(cfg.train.algorithm)) : fs::path(a.out);
    const auto sweep = run_sweep(cfg, lrs, root, opt);
    std::cout << "sweep: " << sweep.runs.size() << " runs, curves " << sweep.curves.string() << '\n';
    return 0;
  }
  const fs::path dir = a.out.empty() ? fs::path("runs") / make_manifest(cfg, "").run_id : fs::path(a.out);
  const auto run = run_training(cfg, dir, opt);
  std::cout << "run " << run.manifest.run_id << ": " << run.result.steps << " steps, " << run.result.episodes
            << " episodes, " << run.result.wall_time_s << " s -> " << dir.string() << '\n';
  return 0;
}

int cmd_eval(const EvalArgs& a) {
  std::optional<learn::Checkpoint> ckpt;
  if (!a.checkpoint.empty()) ckpt = learn::load_checkpoint(a.checkpoint);
  if (!ckpt && !a.random) throw std::invalid_argument("eval needs --checkpoint or --random");
  env::EnvConfig env_cfg = !a.config.empty() ? base_config(a.config).env
                           : ckpt            ? checkpoint_env(*ckpt)
                                             : env::EnvConfig{};
  env::CoverageEnv env(env_cfg);
  std::vector<env::EpisodeRecord> records;
  auto* rec = a.records ? &records : nullptr;
  const EvalSummary s = a.random
                            ? evaluate(env, random_policy(env.action_dim(), a.seed), "random", a.episodes, a.seed, rec)
                            : evaluate_checkpoint(*ckpt, env, a.episodes, a.seed, rec);
  write_eval(a.out, s, rec);
  std::cout << to_json(s).dump(2) << '\n';
  return 0;
}

int cmd_replay(const ReplayArgs& a) {
  const auto record = env::read_jsonl(fs::path(a.record));
  ReplayOptions opt;
  opt.out_dir = a.out;
  opt.snapshot_times = a.at;
  const auto report = replay(record, opt);
  if (!report.ok()) {
    std::cerr << a.record << ": " << describe(*report.divergence) << '\n';
    return 2;
  }
  std::cout << a.record << ": " << report.steps_checked << " steps re-simulated, zero divergence\n";
  for (const auto& s : report.snapshots) {
    std::cout << "  t=" << s.sim_time << " s  coverage " << s.coverage << "%  " << s.path.string() << '\n';
  }
  std::cout << "  " << report.coverage_csv.string() << '\n';
  return 0;
}

int cmd_compare(const CompareArgs& a) {
  const auto manual = env::read_jsonl(fs::path(a.manual));
  const auto ckpt = learn::load_checkpoint(a.checkpoint);
  env::EpisodeRecord drl;
  const auto report = compare_with_checkpoint(manual, ckpt, a.seed, &drl);
  fs::create_directories(a.out);
  {
    std::ofstream csv(fs::path(a.out) / "compare.csv");
    write_compare_csv(csv, report);
    std::ofstream txt(fs::path(a.out) / "compare.txt");
    write_compare_text(txt, report);
  }
  env::write_jsonl(fs::path(a.out) / "drl_episode.jsonl", drl);
  write_compare_text(std::cout, report);
  return 0;
}

int cmd_serve(const ServeArgs& a) {
  ServerOptions opt;
  opt.address = a.address;
  opt.port = a.port;
  opt.env = a.config.empty() ? env::EnvConfig{} : base_config(a.config).env;
  opt.record_dir = a.records;
  opt.log = &std::cout;
  TeleopServer server(opt);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.start();
  std::cout << "teleop server on ws://" << a.address << ':' << server.port() << "/  (records in " << a.records
            << ", Ctrl-C to stop)" << std::endl;
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(200));
  server.stop();
  std::cout << "stopped; " << server.records().size() << " record(s) written\n";
  return 0;
}

int cmd_phantom(const PhantomArgs& a) {
  geometry::TriangleMesh mesh;
  if (a.kind == "stomach")
    mesh = geometry::generate_stomach_phantom();
  else if (a.kind == "sphere")
    mesh = geometry::generate_sphere_phantom(a.vertices, a.radius);
  else
    throw std::invalid_argument("unknown phantom kind '" + a.kind + "'");
  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  if (out.extension() == ".obj")
    geometry::save_obj(out, mesh);
  else
    geometry::save_ply(out, mesh);
  std::cout << out.string() << ": " << mesh.vertex_count() << " vertices, " << mesh.triangles.size() << " triangles\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capscan: capsule-endoscope coverage simulator and RL harness"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a PPO or SAC policy (or sweep learning rates)");
  t->add_option("--algo", train.algo, "ppo or sac (default: [train] algorithm, ppo)")
      ->check(CLI::IsMember({"ppo", "sac"}));
  t->add_option("--config", train.config, "Plain-text config file (defaults apply when omitted)")
      ->check(CLI::ExistingFile);
  t->add_option("--seed", train.seed, "Run seed (default: [train] seed, 0)");
  t->add_option("--out", train.out, "Run directory (default: runs/<run id>, or runs/sweep-<algo> with --sweep)");
  t->add_option("--lr", train.lr, "Learning-rate override (ppo 1e-3, sac 5e-4 by default)");
  t->add_option("--max-steps", train.max_steps, "Environment-step budget override (default 3000000)");
  t->add_option("--sweep", train.sweep, "One run per learning rate, e.g. lr=5e-3,1e-3,5e-4,1e-4");
  t->add_flag("--record-episodes", train.record_episodes, "Write every training episode as JSONL");
  t->add_flag("--quiet", train.quiet, "No progress lines");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint's deterministic policy");
  e->add_option("--checkpoint", eval.checkpoint, "Checkpoint file")->check(CLI::ExistingFile);
  e->add_option("--config", eval.config, "Environment config (default: the one stored in the checkpoint)")
      ->check(CLI::ExistingFile);
  e->add_option("--episodes", eval.episodes, "Number of episodes")->check(CLI::PositiveNumber);
  e->add_option("--seed", eval.seed, "Seed of the first episode; episode i uses seed + i");
  e->add_option("--out", eval.out, "Output directory for summary.json and episodes.jsonl");
  e->add_flag("--random", eval.random, "Evaluate uniform random actions instead (baseline)");
  e->add_flag("--records", eval.records, "Also write full step records under records/");

  ReplayArgs rep;
  auto* r = app.add_subcommand("replay", "Re-simulate an episode record and check it step by step");
  r->add_option("record", rep.record, "Episode record (.jsonl)")->required()->check(CLI::ExistingFile);
  r->add_option("--out", rep.out, "Output directory for coverage.csv and PLY snapshots");
  r->add_option("--at", rep.at, "Snapshot sim times in seconds")->delimiter(',');

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "Manual-vs-DRL coverage table at 60/120/150 s");
  c->add_option("--manual", cmp.manual, "Manual session record from the teleop server")
      ->required()
      ->check(CLI::ExistingFile);
  c->add_option("--checkpoint", cmp.checkpoint, "Trained checkpoint")->required()->check(CLI::ExistingFile);
  c->add_option("--seed", cmp.seed, "Episode seed for the DRL run (default: the manual record's)");
  c->add_option("--out", cmp.out, "Output directory for compare.csv, compare.txt and the DRL record");

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "WebSocket teleoperation server for the browser console");
  s->add_option("--address", serve.address, "Listen address");
  s->add_option("--port", serve.port, "Listen port (0 picks a free one)");
  s->add_option("--config", serve.config, "Environment config")->check(CLI::ExistingFile);
  s->add_option("--records", serve.records, "Directory for session records");

  PhantomArgs ph;
  auto* p = app.add_subcommand("phantom", "Write a phantom mesh (PLY or OBJ by extension)");
  p->add_option("--kind", ph.kind, "stomach or sphere")->check(CLI::IsMember({"stomach", "sphere"}));
  p->add_option("--out", ph.out, "Output file");
  p->add_option("--vertices", ph.vertices, "Sphere vertex target");
  p->add_option("--radius", ph.radius, "Sphere radius in meters");

  CLI11_PARSE(app, argc, argv);

  try {
    if (t->parsed()) return cmd_train(train);
    if (e->parsed()) return cmd_eval(eval);
    if (r->parsed()) return cmd_replay(rep);
    if (c->parsed()) return cmd_compare(cmp);
    if (s->parsed()) return cmd_serve(serve);
    if (p->parsed()) return cmd_phantom(ph);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 1;
}
