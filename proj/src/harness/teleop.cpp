#include "capscan/harness/teleop.hpp"

#include <cmath>

namespace capscan::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json quat(const Quat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

json body(const dynamics::RigidState& s) {
  return {{"position", vec3(s.position)},
          {"orientation", quat(s.orientation)},
          {"velocity", vec3(s.linear_velocity)},
          {"angular_velocity", vec3(s.angular_velocity)}};
}

std::optional<double> axis(const json& msg, const char* key, std::string& err) {
  const auto it = msg.find(key);
  if (it == msg.end()) {
    err = std::string("action frame is missing \"") + key + "\"";
    return std::nullopt;
  }
  if (!it->is_number()) {
    err = std::string("\"") + key + "\" must be a number";
    return std::nullopt;
  }
  const double v = it->get<double>();
  if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
    err = std::string("\"") + key + "\" must lie in [-1, 1]";
    return std::nullopt;
  }
  return v;
}

}  // namespace

json error_frame(const std::string& msg) { return {{"t", "error"}, {"msg", msg}}; }

TeleopSession::TeleopSession(TeleopOptions opt)
    : opt_(std::move(opt)), env_(opt_.env, opt_.scene ? opt_.scene : env::make_scene(opt_.env.phantom)) {
  if (env_.action_dim() != 2) throw std::invalid_argument("teleop supports the planar action mode only");
}

std::vector<std::string> TeleopSession::handle(std::string_view frame) {
  json msg = json::parse(frame.begin(), frame.end(), nullptr, false);
  json reply;
  if (msg.is_discarded() || !msg.is_object()) {
    reply = error_frame("frame is not a JSON object");
  } else if (!msg.contains("t") || !msg["t"].is_string()) {
    reply = error_frame("frame has no string \"t\" field");
  } else {
    const std::string t = msg["t"].get<std::string>();
    if (t == "hello")
      reply = on_hello(msg);
    else if (!greeted_)
      reply = error_frame("send hello first");
    else if (t == "reset")
      reply = on_reset(msg);
    else if (t == "action")
      reply = on_action(msg);
    else if (t == "save")
      reply = on_save();
    else
      reply = error_frame("unknown frame type \"" + t + "\"");
  }
  return {reply.dump()};
}

json TeleopSession::on_hello(const json& msg) {
  if (greeted_) return error_frame("session already initialized");
  const auto it = msg.find("proto");
  if (it == msg.end() || !it->is_number_integer() || it->get<long long>() != kProtocolVersion) {
    return error_frame("unsupported protocol version; server speaks " + std::to_string(kProtocolVersion));
  }
  greeted_ = true;
  const auto& mesh = env_.scene().mesh;
  json vertices = json::array();
  for (const auto& v : mesh.vertices) vertices.push_back(vec3(v));
  return {{"t", "init"},
          {"proto", kProtocolVersion},
          {"vertices", std::move(vertices)},
          {"vertice_count", mesh.vertex_count()},
          {"dt", env_.config().world.dt},
          {"max_steps", env_.config().max_steps}};
}

json TeleopSession::on_reset(const json& msg) {
  const auto it = msg.find("seed");
  if (it == msg.end() || !it->is_number_unsigned()) return error_frame("reset needs an unsigned integer \"seed\"");
  flush();
  env::EpisodeConfig ep;
  ep.seed = it->get<std::uint64_t>();
  ep.max_steps = env_.config().max_steps;
  env_.reset(ep);
  env::EpisodeRecord rec;
  rec.env = env_.config();
  rec.episode = ep;
  rec.controller = kManualController;
  record_ = std::move(rec);
  saved_steps_ = 0;
  return state_frame(nullptr);
}

json TeleopSession::on_action(const json& msg) {
  if (!record_) return error_frame("send reset before actions");
  if (env_.done()) return error_frame("episode finished; send reset");
  std::string err;
  const auto ax = axis(msg, "ax", err);
  if (!ax) return error_frame(err);
  const auto az = axis(msg, "az", err);
  if (!az) return error_frame(err);
  const std::array<double, 2> action{*ax, *az};
  const auto result = env_.step(action);
  record_->steps.push_back(env::make_step_log(env_, action, result));
  return state_frame(&result);
}

json TeleopSession::on_save() {
  if (!record_) return error_frame("nothing to save; send reset first");
  std::string id;
  const fs::path path = write_record(&id);
  return {{"t", "saved"}, {"id", id}, {"path", path.string()}};
}

fs::path TeleopSession::write_record(std::string* id) {
  const std::string name = opt_.session_id + "-" + std::to_string(next_file_++);
  const fs::path path = opt_.record_dir / (name + ".jsonl");
  env::write_jsonl(path, *record_);
  saved_steps_ = record_->steps.size();
  written_.push_back(path);
  if (id) *id = name;
  return path;
}

std::optional<fs::path> TeleopSession::flush() {
  if (!record_ || record_->steps.size() == saved_steps_) return std::nullopt;
  return write_record(nullptr);
}

json TeleopSession::state_frame(const env::StepResult* result) const {
  json ids = json::array();
  if (result) {
    for (auto v : result->info.new_vertices) ids.push_back(v);
  }
  return {{"t", "state"},
          {"step", env_.step_count()},
          {"sim_time", env_.sim_time()},
          {"capsule", body(env_.capsule())},
          {"magnet", body(env_.magnet())},
          {"coverage", env_.tracker().current_coverage()},
          {"new_vertices", std::move(ids)},
          {"reward", result ? result->reward : 0.0},
          {"violation", result ? std::string(dynamics::to_string(result->info.violation)) : std::string("none")},
          {"terminated", result ? result->terminated : false},
          {"truncated", result ? result->truncated : false}};
}

}  // namespace capscan::harness
