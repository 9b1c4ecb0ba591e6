#include "capscan/geometry/phantom.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

namespace capscan::geometry {

namespace {

struct Icosahedron {
  std::vector<Vec3> vertices;
  std::vector<Triangle> faces;
};

Icosahedron icosahedron() {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  Icosahedron ico;
  ico.vertices = {{-1, p, 0}, {1, p, 0},  {-1, -p, 0}, {1, -p, 0}, {0, -1, p},  {0, 1, p},
                  {0, -1, -p}, {0, 1, -p}, {p, 0, -1},  {p, 0, 1},  {-p, 0, -1}, {-p, 0, 1}};
  for (auto& v : ico.vertices) v.normalize();
  ico.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
               {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
               {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  return ico;
}

}  // namespace

TriangleMesh generate_sphere_phantom(std::size_t n_vertices, double radius, bool inward_normals) {
  if (n_vertices < 12) throw std::invalid_argument("sphere phantom needs at least 12 vertices");
  if (!(radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
  const auto freq = static_cast<std::uint32_t>(
      std::max(1.0, std::round(std::sqrt((static_cast<double>(n_vertices) - 2.0) / 10.0))));

  const auto ico = icosahedron();
  TriangleMesh mesh;
  mesh.vertices = ico.vertices;

  // Edge points are shared between neighbouring faces; key them by the
  // ordered corner pair and the step count from the lower corner.
  std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>, std::uint32_t> edge_points;
  auto add = [&](const Vec3& p) {
    mesh.vertices.push_back(p.normalized());
    return static_cast<std::uint32_t>(mesh.vertices.size() - 1);
  };
  auto edge_point = [&](std::uint32_t a, std::uint32_t b, std::uint32_t step) {
    if (step == 0) return a;
    if (step == freq) return b;
    if (a > b) {
      std::swap(a, b);
      step = freq - step;
    }
    const auto key = std::make_tuple(a, b, step);
    if (auto it = edge_points.find(key); it != edge_points.end()) return it->second;
    const double s = static_cast<double>(step) / freq;
    const auto id = add((1.0 - s) * ico.vertices[a] + s * ico.vertices[b]);
    edge_points.emplace(key, id);
    return id;
  };

  for (const auto& f : ico.faces) {
    const Vec3& a = ico.vertices[f[0]];
    const Vec3& b = ico.vertices[f[1]];
    const Vec3& c = ico.vertices[f[2]];
    // grid[i][j]: i steps toward b, j steps toward c, i + j <= freq.
    std::vector<std::vector<std::uint32_t>> grid(freq + 1);
    for (std::uint32_t i = 0; i <= freq; ++i) {
      grid[i].resize(freq + 1 - i);
      for (std::uint32_t j = 0; i + j <= freq; ++j) {
        if (j == 0) grid[i][j] = edge_point(f[0], f[1], i);
        else if (i == 0) grid[i][j] = edge_point(f[0], f[2], j);
        else if (i + j == freq) grid[i][j] = edge_point(f[1], f[2], j);
        else {
          const double w = static_cast<double>(freq - i - j);
          grid[i][j] = add((w * a + i * b + j * c) / freq);
        }
      }
    }
    for (std::uint32_t i = 0; i < freq; ++i) {
      for (std::uint32_t j = 0; i + j < freq; ++j) {
        mesh.triangles.push_back({grid[i][j], grid[i + 1][j], grid[i][j + 1]});
        if (i + j + 1 < freq) mesh.triangles.push_back({grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]});
      }
    }
  }

  mesh.normals = mesh.vertices;  // unit sphere: position is the outward normal
  for (auto& v : mesh.vertices) v *= radius;
  if (inward_normals) orient_inward(mesh);
  return mesh;
}

TriangleMesh generate_stomach_phantom() {
  constexpr std::uint32_t kRings = 170;
  constexpr std::uint32_t kSegments = 146;
  // Cubic Bezier centerline in the x-y plane: fundus high on the left, body
  // descending, antrum curving up to the right.
  const std::array<Vec3, 4> ctrl{Vec3(-0.040, 0.045, 0.0), Vec3(-0.045, -0.060, 0.0), Vec3(0.060, -0.075, 0.0),
                                 Vec3(0.085, -0.010, 0.0)};
  auto point = [&](double t) {
    const double u = 1.0 - t;
    return Vec3(u * u * u * ctrl[0] + 3 * u * u * t * ctrl[1] + 3 * u * t * t * ctrl[2] + t * t * t * ctrl[3]);
  };
  auto tangent = [&](double t) {
    const double u = 1.0 - t;
    return Vec3(3 * u * u * (ctrl[1] - ctrl[0]) + 6 * u * t * (ctrl[2] - ctrl[1]) + 3 * t * t * (ctrl[3] - ctrl[2]))
        .normalized();
  };
  auto radius = [](double t) { return 0.042 * std::pow(std::sin(std::numbers::pi * t), 0.8) * (1.0 - 0.4 * t); };
  constexpr double kDepthScale = 0.85;  // slightly flattened front-to-back

  TriangleMesh mesh;
  mesh.vertices.reserve(kStomachVertexCount);
  mesh.vertices.push_back(point(0.0));
  for (std::uint32_t r = 1; r <= kRings; ++r) {
    const double t = static_cast<double>(r) / (kRings + 1);
    const Vec3 c = point(t);
    const Vec3 tan = tangent(t);
    const Vec3 side = Vec3::UnitZ();
    const Vec3 normal = side.cross(tan).normalized();
    const double rho = radius(t);
    for (std::uint32_t s = 0; s < kSegments; ++s) {
      const double phi = 2.0 * std::numbers::pi * s / kSegments;
      mesh.vertices.push_back(c + rho * (std::cos(phi) * normal + kDepthScale * std::sin(phi) * side));
    }
  }
  mesh.vertices.push_back(point(1.0));

  const std::uint32_t first_pole = 0;
  const auto last_pole = static_cast<std::uint32_t>(mesh.vertices.size() - 1);
  auto ring = [&](std::uint32_t r, std::uint32_t s) { return 1 + (r - 1) * kSegments + (s % kSegments); };
  for (std::uint32_t s = 0; s < kSegments; ++s) {
    mesh.triangles.push_back({first_pole, ring(1, s + 1), ring(1, s)});
  }
  for (std::uint32_t r = 1; r < kRings; ++r) {
    for (std::uint32_t s = 0; s < kSegments; ++s) {
      mesh.triangles.push_back({ring(r, s), ring(r, s + 1), ring(r + 1, s)});
      mesh.triangles.push_back({ring(r, s + 1), ring(r + 1, s + 1), ring(r + 1, s)});
    }
  }
  for (std::uint32_t s = 0; s < kSegments; ++s) {
    mesh.triangles.push_back({last_pole, ring(kRings, s), ring(kRings, s + 1)});
  }
  // The sweep direction decides the winding; flip so that it faces outward.
  if (signed_volume(mesh) < 0.0) {
    for (auto& t : mesh.triangles) std::swap(t[1], t[2]);
  }
  mesh.normals = compute_vertex_normals(mesh.vertices, mesh.triangles);
  return mesh;
}

}  // namespace capscan::geometry
