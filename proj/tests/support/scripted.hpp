#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>

#include "capscan/env/episode_record.hpp"

namespace capscan::testing {

// Drives the magnet out to radius R, then around a circle of that radius
// centered above the phantom (angular rate w per step). Planar mode only.
inline env::Policy orbit_policy(const env::CoverageEnv& env, double radius, double w = 0.02) {
  const double per_step = env.config().magnet_speed_max * env.config().world.dt;
  const Vec3 c = env.magnet_start();
  auto t = std::make_shared<int>(0);
  return [=](const env::Observation& o) {
    const double reach = radius / per_step;
    const double phase = *t < reach ? 0.0 : (*t - reach) * w;
    ++*t;
    const double tx = c.x() + radius * std::cos(phase);
    const double tz = c.z() + radius * std::sin(phase);
    return std::vector<double>{std::clamp((tx - o[10]) / per_step, -1.0, 1.0),
                               std::clamp((tz - o[12]) / per_step, -1.0, 1.0)};
  };
}

// Binary little-endian PLY with uchar red/green/blue vertex properties:
// number of vertices colored exactly (r, g, b). Returns -1 on a layout it
// does not understand.
inline long count_ply_color(const std::string& bytes, int r, int g, int b) {
  const auto end = bytes.find("end_header\n");
  if (end == std::string::npos) return -1;
  std::istringstream header(bytes.substr(0, end));
  std::string line;
  long vertices = -1;
  std::size_t stride = 0, red = 0, green = 0, blue = 0;
  bool in_vertex = false;
  while (std::getline(header, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "element") {
      std::string what;
      long n = 0;
      ls >> what >> n;
      in_vertex = what == "vertex";
      if (in_vertex) vertices = n;
    } else if (word == "property" && in_vertex) {
      std::string type, name;
      ls >> type >> name;
      const std::size_t size = type == "float" ? 4 : type == "uchar" ? 1 : type == "double" ? 8 : 0;
      if (size == 0) return -1;
      if (name == "red") red = stride;
      if (name == "green") green = stride;
      if (name == "blue") blue = stride;
      stride += size;
    }
  }
  if (vertices < 0 || stride == 0) return -1;
  const std::size_t body = end + std::string("end_header\n").size();
  if (bytes.size() < body + stride * static_cast<std::size_t>(vertices)) return -1;
  long count = 0;
  for (long v = 0; v < vertices; ++v) {
    const auto* row = reinterpret_cast<const unsigned char*>(bytes.data() + body + stride * v);
    if (row[red] == r && row[green] == g && row[blue] == b) ++count;
  }
  return count;
}

}  // namespace capscan::testing
