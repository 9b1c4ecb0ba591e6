#include "capscan/env/env_config.hpp"

#include <stdexcept>

namespace capscan::env {

using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
Vec3 json_vec(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

PhantomKind phantom_kind(const std::string& s) {
  if (s == "sphere") return PhantomKind::sphere;
  if (s == "stomach") return PhantomKind::stomach;
  if (s == "file") return PhantomKind::file;
  throw ConfigError("unknown phantom kind '" + s + "'");
}

geometry::VisibilityMode visibility_mode(const std::string& s) {
  if (s == "occlusion") return geometry::VisibilityMode::occlusion;
  if (s == "frustum" || s == "frustum_only") return geometry::VisibilityMode::frustum_only;
  throw ConfigError("unknown visibility mode '" + s + "'");
}

ActionMode action_mode(const std::string& s) {
  if (s == "planar") return ActionMode::planar;
  if (s == "extended") return ActionMode::extended;
  throw ConfigError("unknown action mode '" + s + "'");
}

}  // namespace

std::string to_string(PhantomKind k) {
  switch (k) {
    case PhantomKind::sphere: return "sphere";
    case PhantomKind::stomach: return "stomach";
    case PhantomKind::file: return "file";
  }
  return "sphere";
}

std::string to_string(geometry::VisibilityMode m) {
  return m == geometry::VisibilityMode::occlusion ? "occlusion" : "frustum";
}

std::string to_string(ActionMode m) { return m == ActionMode::planar ? "planar" : "extended"; }

void RewardSpec::validate() const {
  if (!(k > 0.0)) throw std::invalid_argument("reward scale k must be positive");
  if (!(diff_threshold >= 0.0)) throw std::invalid_argument("diff threshold must be non-negative");
}

dynamics::WorldParams EnvConfig::substep_params() const {
  auto p = world;
  p.dt = world.dt / physics_substeps;
  return p;
}

void EnvConfig::validate() const {
  camera.validate();
  world.validate();
  capsule_dipole.validate();
  magnet_dipole.validate();
  reward.validate();
  if (physics_substeps < 1) throw std::invalid_argument("physics_substeps must be >= 1");
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (!(capsule_length > 0.0 && capsule_diameter > 0.0)) throw std::invalid_argument("capsule size must be positive");
  if (!(magnet_speed_max > 0.0)) throw std::invalid_argument("magnet speed must be positive");
  if (!(capsule_speed_max > 0.0)) throw std::invalid_argument("capsule speed limit must be positive");
  if (!(spawn_fraction > 0.0 && spawn_fraction <= 1.0)) throw std::invalid_argument("spawn fraction must lie in (0, 1]");
  if (phantom.kind == PhantomKind::sphere && phantom.sphere_vertices < 12) {
    throw std::invalid_argument("sphere phantom needs at least 12 vertices");
  }
  // Explicit drag terms are only stable when they remove less than twice the
  // momentum per substep.
  const auto sub = substep_params();
  if (sub.dt * sub.linear_drag / sub.capsule_mass >= 2.0 ||
      sub.dt * sub.angular_drag / sub.capsule_inertia.minCoeff() >= 2.0) {
    throw std::invalid_argument("drag is too stiff for the physics substep; raise physics_substeps");
  }
}

json to_json(const EnvConfig& c) {
  return json{
      {"phantom",
       {{"kind", to_string(c.phantom.kind)},
        {"sphere_vertices", c.phantom.sphere_vertices},
        {"sphere_radius", c.phantom.sphere_radius},
        {"path", c.phantom.path}}},
      {"camera", {{"fov_deg", c.camera.fov_deg}, {"near", c.camera.near}, {"far", c.camera.far}}},
      {"visibility", to_string(c.visibility)},
      {"world",
       {{"dt", c.world.dt},
        {"gravity", vec_json(c.world.gravity)},
        {"capsule_mass", c.world.capsule_mass},
        {"capsule_inertia", vec_json(c.world.capsule_inertia)},
        {"linear_drag", c.world.linear_drag},
        {"angular_drag", c.world.angular_drag},
        {"buoyancy_fraction", c.world.buoyancy_fraction}}},
      {"physics_substeps", c.physics_substeps},
      {"capsule",
       {{"length", c.capsule_length},
        {"diameter", c.capsule_diameter},
        {"moment", c.capsule_dipole.moment_magnitude},
        {"axis", vec_json(c.capsule_dipole.moment_axis)}}},
      {"magnet",
       {{"moment", c.magnet_dipole.moment_magnitude},
        {"axis", vec_json(c.magnet_dipole.moment_axis)},
        {"start_height", c.magnet_start_height},
        {"speed_max", c.magnet_speed_max},
        {"angular_speed_max", c.magnet_angular_speed_max}}},
      {"bounds",
       {{"capsule_box_inflation", c.capsule_box_inflation},
        {"magnet_box_size", c.magnet_box_size},
        {"magnet_box_gap", c.magnet_box_gap},
        {"capsule_speed_max", c.capsule_speed_max}}},
      {"spawn_fraction", c.spawn_fraction},
      {"reward",
       {{"k", c.reward.k},
        {"diff_threshold", c.reward.diff_threshold},
        {"stall_penalty", c.reward.stall_penalty},
        {"violation_penalty", c.reward.violation_penalty}}},
      {"action_mode", to_string(c.action_mode)},
      {"max_steps", c.max_steps},
  };
}

EnvConfig env_config_from_json(const json& j) {
  EnvConfig c;
  const auto& ph = j.at("phantom");
  c.phantom.kind = phantom_kind(ph.at("kind").get<std::string>());
  c.phantom.sphere_vertices = ph.at("sphere_vertices").get<std::size_t>();
  c.phantom.sphere_radius = ph.at("sphere_radius").get<double>();
  c.phantom.path = ph.at("path").get<std::string>();
  const auto& cam = j.at("camera");
  c.camera = {cam.at("fov_deg").get<double>(), cam.at("near").get<double>(), cam.at("far").get<double>()};
  c.visibility = visibility_mode(j.at("visibility").get<std::string>());
  const auto& w = j.at("world");
  c.world.dt = w.at("dt").get<double>();
  c.world.gravity = json_vec(w.at("gravity"));
  c.world.capsule_mass = w.at("capsule_mass").get<double>();
  c.world.capsule_inertia = json_vec(w.at("capsule_inertia"));
  c.world.linear_drag = w.at("linear_drag").get<double>();
  c.world.angular_drag = w.at("angular_drag").get<double>();
  c.world.buoyancy_fraction = w.at("buoyancy_fraction").get<double>();
  c.physics_substeps = j.at("physics_substeps").get<int>();
  const auto& cap = j.at("capsule");
  c.capsule_length = cap.at("length").get<double>();
  c.capsule_diameter = cap.at("diameter").get<double>();
  c.capsule_dipole = {cap.at("moment").get<double>(), json_vec(cap.at("axis"))};
  const auto& mag = j.at("magnet");
  c.magnet_dipole = {mag.at("moment").get<double>(), json_vec(mag.at("axis"))};
  c.magnet_start_height = mag.at("start_height").get<double>();
  c.magnet_speed_max = mag.at("speed_max").get<double>();
  c.magnet_angular_speed_max = mag.at("angular_speed_max").get<double>();
  const auto& b = j.at("bounds");
  c.capsule_box_inflation = b.at("capsule_box_inflation").get<double>();
  c.magnet_box_size = b.at("magnet_box_size").get<double>();
  c.magnet_box_gap = b.at("magnet_box_gap").get<double>();
  c.capsule_speed_max = b.at("capsule_speed_max").get<double>();
  c.spawn_fraction = j.at("spawn_fraction").get<double>();
  const auto& r = j.at("reward");
  c.reward = {r.at("k").get<double>(), r.at("diff_threshold").get<double>(), r.at("stall_penalty").get<double>(),
              r.at("violation_penalty").get<double>()};
  c.action_mode = action_mode(j.at("action_mode").get<std::string>());
  c.max_steps = j.at("max_steps").get<int>();
  return c;
}

EnvConfig env_config_from(const KeyValueConfig& kv, EnvConfig c) {
  c.max_steps = static_cast<int>(kv.get_int("env", "max_steps", c.max_steps));
  c.physics_substeps = static_cast<int>(kv.get_int("env", "physics_substeps", c.physics_substeps));
  c.action_mode = action_mode(kv.get_string("env", "action_mode", to_string(c.action_mode)));
  c.visibility = visibility_mode(kv.get_string("env", "visibility", to_string(c.visibility)));
  c.spawn_fraction = kv.get("env", "spawn_fraction", c.spawn_fraction);

  c.phantom.kind = phantom_kind(kv.get_string("phantom", "kind", to_string(c.phantom.kind)));
  c.phantom.sphere_vertices =
      static_cast<std::size_t>(kv.get_int("phantom", "sphere_vertices", static_cast<long long>(c.phantom.sphere_vertices)));
  c.phantom.sphere_radius = kv.get("phantom", "sphere_radius", c.phantom.sphere_radius);
  c.phantom.path = kv.get_string("phantom", "path", c.phantom.path);
  if (kv.has("phantom", "path") && !kv.has("phantom", "kind")) c.phantom.kind = PhantomKind::file;

  c.camera.fov_deg = kv.get("camera", "fov_deg", c.camera.fov_deg);
  c.camera.near = kv.get("camera", "near", c.camera.near);
  c.camera.far = kv.get("camera", "far", c.camera.far);

  c.world.dt = kv.get("world", "dt", c.world.dt);
  c.world.gravity = kv.get_vec3("world", "gravity", c.world.gravity);
  c.world.linear_drag = kv.get("world", "linear_drag", c.world.linear_drag);
  c.world.angular_drag = kv.get("world", "angular_drag", c.world.angular_drag);
  c.world.buoyancy_fraction = kv.get("world", "buoyancy_fraction", c.world.buoyancy_fraction);

  c.capsule_length = kv.get("capsule", "length", c.capsule_length);
  c.capsule_diameter = kv.get("capsule", "diameter", c.capsule_diameter);
  const bool resized = kv.has("capsule", "length") || kv.has("capsule", "diameter") || kv.has("capsule", "mass");
  c.world.capsule_mass = kv.get("capsule", "mass", c.world.capsule_mass);
  if (resized) c.world.capsule_inertia = dynamics::cylinder_inertia(c.world.capsule_mass, c.capsule_length, c.capsule_diameter);
  c.world.capsule_inertia = kv.get_vec3("capsule", "inertia", c.world.capsule_inertia);
  c.capsule_dipole.moment_magnitude = kv.get("capsule", "moment", c.capsule_dipole.moment_magnitude);
  c.capsule_dipole.moment_axis = kv.get_vec3("capsule", "moment_axis", c.capsule_dipole.moment_axis).normalized();

  c.magnet_dipole.moment_magnitude = kv.get("magnet", "moment", c.magnet_dipole.moment_magnitude);
  c.magnet_dipole.moment_axis = kv.get_vec3("magnet", "moment_axis", c.magnet_dipole.moment_axis).normalized();
  c.magnet_start_height = kv.get("magnet", "start_height", c.magnet_start_height);
  c.magnet_speed_max = kv.get("magnet", "speed_max", c.magnet_speed_max);
  c.magnet_angular_speed_max = kv.get("magnet", "angular_speed_max", c.magnet_angular_speed_max);

  c.capsule_box_inflation = kv.get("bounds", "capsule_box_inflation", c.capsule_box_inflation);
  c.magnet_box_size = kv.get("bounds", "magnet_box_size", c.magnet_box_size);
  c.magnet_box_gap = kv.get("bounds", "magnet_box_gap", c.magnet_box_gap);
  c.capsule_speed_max = kv.get("bounds", "capsule_speed_max", c.capsule_speed_max);

  c.reward.k = kv.get("reward", "k", c.reward.k);
  c.reward.diff_threshold = kv.get("reward", "diff_threshold", c.reward.diff_threshold);
  c.reward.stall_penalty = kv.get("reward", "stall_penalty", c.reward.stall_penalty);
  c.reward.violation_penalty = kv.get("reward", "violation_penalty", c.reward.violation_penalty);
  return c;
}

KeyValueConfig to_kv(const EnvConfig& c) {
  KeyValueConfig kv;
  auto num = [&](const char* sec, const char* key, double v) { kv.set(sec, key, format_double(v)); };
  auto vec = [&](const char* sec, const char* key, const Vec3& v) {
    kv.set(sec, key, format_double(v.x()) + ", " + format_double(v.y()) + ", " + format_double(v.z()));
  };
  kv.set("env", "max_steps", std::to_string(c.max_steps));
  kv.set("env", "physics_substeps", std::to_string(c.physics_substeps));
  kv.set("env", "action_mode", to_string(c.action_mode));
  kv.set("env", "visibility", to_string(c.visibility));
  num("env", "spawn_fraction", c.spawn_fraction);
  kv.set("phantom", "kind", to_string(c.phantom.kind));
  kv.set("phantom", "sphere_vertices", std::to_string(c.phantom.sphere_vertices));
  num("phantom", "sphere_radius", c.phantom.sphere_radius);
  if (!c.phantom.path.empty()) kv.set("phantom", "path", c.phantom.path);
  num("camera", "fov_deg", c.camera.fov_deg);
  num("camera", "near", c.camera.near);
  num("camera", "far", c.camera.far);
  num("world", "dt", c.world.dt);
  vec("world", "gravity", c.world.gravity);
  num("world", "linear_drag", c.world.linear_drag);
  num("world", "angular_drag", c.world.angular_drag);
  num("world", "buoyancy_fraction", c.world.buoyancy_fraction);
  num("capsule", "length", c.capsule_length);
  num("capsule", "diameter", c.capsule_diameter);
  num("capsule", "mass", c.world.capsule_mass);
  vec("capsule", "inertia", c.world.capsule_inertia);
  num("capsule", "moment", c.capsule_dipole.moment_magnitude);
  vec("capsule", "moment_axis", c.capsule_dipole.moment_axis);
  num("magnet", "moment", c.magnet_dipole.moment_magnitude);
  vec("magnet", "moment_axis", c.magnet_dipole.moment_axis);
  num("magnet", "start_height", c.magnet_start_height);
  num("magnet", "speed_max", c.magnet_speed_max);
  num("magnet", "angular_speed_max", c.magnet_angular_speed_max);
  num("bounds", "capsule_box_inflation", c.capsule_box_inflation);
  num("bounds", "magnet_box_size", c.magnet_box_size);
  num("bounds", "magnet_box_gap", c.magnet_box_gap);
  num("bounds", "capsule_speed_max", c.capsule_speed_max);
  num("reward", "k", c.reward.k);
  num("reward", "diff_threshold", c.reward.diff_threshold);
  num("reward", "stall_penalty", c.reward.stall_penalty);
  num("reward", "violation_penalty", c.reward.violation_penalty);
  return kv;
}

}  // namespace capscan::env
