#include "capscan/harness/run.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace capscan::harness {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string lr_token(double lr) {
  std::ostringstream s;
  s << std::setprecision(6) << lr;
  return s.str();
}

}  // namespace

RunConfig load_run_config(const KeyValueConfig& kv, std::vector<std::string>* warnings) {
  RunConfig cfg;
  cfg.env = env::env_config_from(kv);
  cfg.train = learn::train_config_from(kv, {}, warnings);
  cfg.env.validate();
  cfg.train.validate();
  if (warnings) {
    for (const auto& key : kv.unread_keys()) warnings->push_back("unknown config key " + key);
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path, std::vector<std::string>* warnings) {
  return load_run_config(KeyValueConfig::load(path), warnings);
}

KeyValueConfig snapshot(const RunConfig& cfg) {
  KeyValueConfig kv = env::to_kv(cfg.env);
  learn::to_kv(cfg.train, kv);
  return kv;
}

std::string git_blob_hash(const std::string& text) {
  const std::string head = "blob " + std::to_string(text.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, head.data(), head.size()) == 1 &&
                  EVP_DigestUpdate(ctx, text.data(), text.size()) == 1 && EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 digest failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

RunManifest make_manifest(const RunConfig& cfg, const fs::path& out_dir, std::string run_id) {
  RunManifest m;
  m.algorithm = cfg.train.algorithm;
  m.seed = cfg.train.seed;
  m.learning_rate = cfg.train.learning_rate();
  m.max_steps = cfg.train.max_steps();
  m.config_text = snapshot(cfg).dump();
  m.config_hash = git_blob_hash(m.config_text);
  m.output_dir = out_dir.string();
  if (run_id.empty()) {
    run_id = learn::to_string(m.algorithm) + "-lr" + lr_token(m.learning_rate) + "-s" + std::to_string(m.seed) + "-" +
             m.config_hash.substr(0, 8);
  }
  m.run_id = std::move(run_id);
  return m;
}

nlohmann::json to_json(const RunManifest& m) {
  return {{"format", kManifestFormat},
          {"version", kManifestVersion},
          {"run_id", m.run_id},
          {"algorithm", learn::to_string(m.algorithm)},
          {"seed", m.seed},
          {"learning_rate", m.learning_rate},
          {"max_steps", m.max_steps},
          {"config_hash", m.config_hash},
          {"config", m.config_text},
          {"output_dir", m.output_dir},
          {"formats",
           {{"config", kConfigVersion},
            {"stats_csv", kStatsCsvVersion},
            {"checkpoint", learn::kCheckpointVersion},
            {"episode", {{"format", env::kRecordFormat}, {"version", env::kRecordVersion}}}}},
          {"rollout", "single-instance"}};
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kManifestFormat) throw std::runtime_error("not a run manifest");
  if (j.value("version", 0) != kManifestVersion) throw std::runtime_error("unsupported manifest version");
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.algorithm = learn::algorithm_from_string(j.at("algorithm").get<std::string>());
  m.seed = j.at("seed").get<std::uint64_t>();
  m.learning_rate = j.at("learning_rate").get<double>();
  m.max_steps = j.at("max_steps").get<long long>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.config_text = j.at("config").get<std::string>();
  m.output_dir = j.at("output_dir").get<std::string>();
  return m;
}

RunManifest read_manifest(const fs::path& run_dir) {
  std::ifstream in(run_dir / "manifest.json");
  if (!in) throw std::runtime_error("no manifest in " + run_dir.string());
  return manifest_from_json(nlohmann::json::parse(in));
}

std::string checkpoint_name(long long step) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "step_%09lld.ckpt", step);
  return buf;
}

RunOutcome run_training(const RunConfig& cfg, const fs::path& out_dir, const RunOptions& opt) {
  cfg.env.validate();
  cfg.train.validate();
  if (fs::exists(out_dir / "manifest.json")) {
    throw std::runtime_error(out_dir.string() + " already holds a run; choose another --out");
  }
  fs::create_directories(out_dir / "checkpoints");
  if (opt.record_episodes) fs::create_directories(out_dir / "episodes");

  RunOutcome outcome;
  outcome.dir = out_dir;
  outcome.manifest = make_manifest(cfg, out_dir, opt.run_id);
  write_text(out_dir / "config.cfg", outcome.manifest.config_text);
  write_text(out_dir / "manifest.json", to_json(outcome.manifest).dump(2) + "\n");

  std::ofstream stats(out_dir / "stats.csv", std::ios::binary);
  if (!stats) throw std::runtime_error("cannot write stats.csv");
  stats << learn::kTrainStatsHeader << '\n';

  env::CoverageEnv environment(cfg.env);
  learn::TrainHooks hooks;
  hooks.on_stats = [&](const learn::TrainStats& s) {
    stats << learn::to_csv_row(s) << '\n';
    stats.flush();
    if (opt.log) {
      *opt.log << "step " << s.step << "  episodes " << s.episodes << "  reward " << s.mean_reward << "  coverage "
               << s.mean_coverage << "  lr " << s.learning_rate << std::endl;
    }
  };
  hooks.on_checkpoint = [&](long long step, const learn::Checkpoint& ck) {
    learn::save_checkpoint(out_dir / "checkpoints" / checkpoint_name(step), ck);
  };
  int episode_index = 0;
  if (opt.record_episodes) {
    hooks.on_episode = [&](const env::EpisodeRecord& r) {
      char name[40];
      std::snprintf(name, sizeof name, "episode_%06d.jsonl", episode_index++);
      env::write_jsonl(out_dir / "episodes" / name, r);
    };
  }

  outcome.result = learn::train(environment, cfg.train, hooks);
  learn::save_checkpoint(out_dir / "final.ckpt", outcome.result.final_checkpoint);

  const nlohmann::json summary{{"run_id", outcome.manifest.run_id},
                               {"steps", outcome.result.steps},
                               {"episodes", outcome.result.episodes},
                               {"wall_time_s", outcome.result.wall_time_s},
                               {"final_checkpoint", "final.ckpt"}};
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  return outcome;
}

std::string sweep_dir_name(double lr) { return "lr_" + lr_token(lr); }

SweepOutcome run_sweep(const RunConfig& cfg, const std::vector<double>& learning_rates, const fs::path& out_root,
                       const RunOptions& opt) {
  if (learning_rates.empty()) throw std::invalid_argument("sweep needs at least one learning rate");
  for (std::size_t i = 0; i < learning_rates.size(); ++i) {
    if (!(learning_rates[i] > 0.0)) throw std::invalid_argument("sweep learning rates must be positive");
    for (std::size_t k = 0; k < i; ++k) {
      if (sweep_dir_name(learning_rates[k]) == sweep_dir_name(learning_rates[i])) {
        throw std::invalid_argument("duplicate learning rate in sweep");
      }
    }
  }
  fs::create_directories(out_root);
  SweepOutcome sweep;
  sweep.curves = out_root / "curves.csv";
  std::ofstream curves(sweep.curves, std::ios::binary);
  if (!curves) throw std::runtime_error("cannot write " + sweep.curves.string());
  curves << kCurvesHeader << '\n';
  for (double lr : learning_rates) {
    RunConfig run = cfg;
    run.train.set_learning_rate(lr);
    RunOptions o = opt;
    o.run_id.clear();
    if (opt.log) *opt.log << "sweep: lr " << format_double(lr) << std::endl;
    sweep.runs.push_back(run_training(run, out_root / sweep_dir_name(lr), o));
    for (const auto& s : sweep.runs.back().result.stats) {
      curves << format_double(lr) << ',' << s.step << ',' << format_double(s.mean_reward) << ','
             << format_double(s.policy_loss) << ',' << format_double(s.value_loss) << ',' << format_double(s.entropy)
             << '\n';
    }
    curves.flush();
  }
  return sweep;
}

}  // namespace capscan::harness
