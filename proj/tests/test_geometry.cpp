#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "capscan/geometry/bvh.hpp"
#include "capscan/geometry/coverage.hpp"
#include "capscan/geometry/mesh_io.hpp"
#include "capscan/geometry/phantom.hpp"
#include "capscan/geometry/visibility.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace capscan;
using namespace capscan::geometry;

namespace {

const char* kTetraObj = R"(# unit tetrahedron
v 0 0 0
v 1 0 0
v 0 1 0
v 0 0 1
f 1 3 2
f 1 2 4
f 1 4 3
f 2 3 4
)";

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "capscan_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("load_mesh reads a unit tetrahedron with unit normals") {
  const auto path = temp_path("tetra.obj");
  std::ofstream(path) << kTetraObj;
  const auto mesh = load_mesh(path);
  CHECK(mesh.vertex_count() == 4);
  CHECK(mesh.triangles.size() == 4);
  for (const auto& n : mesh.normals) CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(is_watertight(mesh));
  CHECK(signed_volume(mesh) == doctest::Approx(1.0 / 6.0));
  CHECK_NOTHROW(validate(mesh));
}

TEST_CASE("load_obj rejects quads, empty files and bad indices") {
  std::istringstream quad("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  CHECK_THROWS_WITH_AS(load_obj(quad), doctest::Contains("non-triangle face"), MeshIoError);
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_WITH_AS(load_obj(empty), doctest::Contains("zero vertices"), MeshIoError);
  std::istringstream bad("v 0 0 0\nv 1 0 0\nv 1 1 0\nf 1 2 9\n");
  CHECK_THROWS_AS(load_obj(bad), MeshIoError);
  CHECK_THROWS_AS(load_mesh(temp_path("missing.obj")), MeshIoError);
}

TEST_CASE("load_obj accepts slash-separated references and file normals") {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 2\nf 1//1 2//1 3//1\n");
  const auto mesh = load_obj(in);
  REQUIRE(mesh.normals.size() == 3);
  CHECK(mesh.normals[0].isApprox(Vec3::UnitZ()));
}

TEST_CASE("binary PLY survives a save/load round trip") {
  const auto sphere = generate_sphere_phantom(162, 0.05);
  const auto path = temp_path("sphere.ply");
  std::vector<bool> visited(sphere.vertex_count(), false);
  visited[3] = true;
  const auto colors = coverage_colors(visited);
  save_ply(path, sphere, &colors);
  const auto back = load_mesh(path);
  REQUIRE(back.vertex_count() == sphere.vertex_count());
  REQUIRE(back.triangles == sphere.triangles);
  for (std::size_t i = 0; i < back.vertex_count(); ++i) {
    CHECK((back.vertices[i] - sphere.vertices[i]).norm() < 1e-7);  // float storage
    CHECK(back.normals[i].norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("PLY loader rejects ascii bodies and polygon faces") {
  std::istringstream ascii("ply\nformat ascii 1.0\nelement vertex 0\nend_header\n");
  CHECK_THROWS_AS(load_ply(ascii), MeshIoError);

  std::ostringstream bin;
  bin << "ply\nformat binary_little_endian 1.0\nelement vertex 4\nproperty float x\nproperty float y\n"
         "property float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n";
  for (int i = 0; i < 12; ++i) {
    float f = static_cast<float>(i % 2);
    bin.write(reinterpret_cast<const char*>(&f), 4);
  }
  const unsigned char four = 4;
  bin.write(reinterpret_cast<const char*>(&four), 1);
  for (int i = 0; i < 4; ++i) bin.write(reinterpret_cast<const char*>(&i), 4);
  std::istringstream in(bin.str());
  CHECK_THROWS_WITH_AS(load_ply(in), doctest::Contains("non-triangle face"), MeshIoError);
}

TEST_CASE("sphere phantom vertex counts") {
  const auto ico = generate_sphere_phantom(12, 0.05);
  CHECK(ico.vertex_count() == 12);
  CHECK(ico.triangles.size() == 20);

  const auto s2000 = generate_sphere_phantom(2000, 0.05);
  CHECK(s2000.vertex_count() >= 1800);
  CHECK(s2000.vertex_count() <= 2200);

  CHECK_THROWS_AS(generate_sphere_phantom(11, 0.05), std::invalid_argument);
}

TEST_CASE("sphere phantom is a closed outward surface; inward flag flips it") {
  for (std::size_t n : {12u, 162u, 2000u}) {
    auto mesh = generate_sphere_phantom(n, 0.05);
    CHECK_NOTHROW(validate(mesh));
    CHECK(is_watertight(mesh));
    CHECK(signed_volume(mesh) > 0.0);
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
      CHECK(mesh.vertices[i].norm() == doctest::Approx(0.05));
      CHECK(mesh.normals[i].dot(mesh.vertices[i]) > 0.0);
    }
    const auto inward = generate_sphere_phantom(n, 0.05, true);
    CHECK(is_watertight(inward));
    CHECK(signed_volume(inward) < 0.0);
    for (std::size_t i = 0; i < inward.vertex_count(); ++i) CHECK(inward.normals[i].dot(inward.vertices[i]) < 0.0);
  }
}

TEST_CASE("stomach phantom has the reference vertex count and is closed") {
  const auto mesh = generate_stomach_phantom();
  CHECK(mesh.vertex_count() == kStomachVertexCount);
  CHECK(is_watertight(mesh));
  CHECK(signed_volume(mesh) > 0.0);
  CHECK_NOTHROW(validate(mesh));
  const auto box = mesh.bounds();
  CHECK(box.extent().maxCoeff() < 0.25);
  CHECK(box.extent().minCoeff() > 0.03);
}

TEST_CASE("bundled stomach phantom file loads with 24822 vertices") {
  const std::filesystem::path path = CAPSCAN_DATA_DIR "/stomach_phantom.ply";
  REQUIRE(std::filesystem::exists(path));
  const auto mesh = load_mesh(path);
  CHECK(mesh.vertex_count() == 24822);
  CHECK(is_watertight(mesh));
}

TEST_CASE("BVH nearest hit agrees with exhaustive iteration") {
  const auto mesh = testing::cavity_with_obstacle(642, 0.05, 162, 0.015, Vec3(0.01, 0.0, 0.005));
  const BvhIndex bvh(mesh);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const Vec3 origin = testing::random_in_ball(rng, 0.045);
    const Vec3 dir = testing::random_rotation(rng) * Vec3::UnitZ();
    std::optional<RayHit> brute;
    for (std::uint32_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& tri = mesh.triangles[t];
      if (auto h = intersect_ray_triangle(origin, dir, mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                          mesh.vertices[tri[2]], 0.0, 1.0)) {
        if (!brute || *h < brute->t || (*h == brute->t && t < brute->triangle)) brute = RayHit{*h, t};
      }
    }
    const auto hit = bvh.nearest_hit(origin, dir, 0.0, 1.0);
    REQUIRE(hit.has_value() == brute.has_value());
    if (hit) {
      CHECK(hit->t == brute->t);
      CHECK(hit->triangle == brute->triangle);
    }
  }
}

TEST_CASE("BVH leaves cover every triangle exactly once") {
  const auto mesh = generate_sphere_phantom(642, 0.05);
  const BvhIndex bvh(mesh);
  std::vector<int> seen(mesh.triangles.size(), 0);
  for (const auto& node : bvh.nodes()) {
    if (!node.leaf()) continue;
    for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
      const auto tri = bvh.triangle_order()[i];
      ++seen[tri];
      for (const auto& v : bvh.corners(tri)) CHECK(node.box.contains(v));
    }
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

TEST_CASE("BVH closest point and containment") {
  const auto mesh = generate_sphere_phantom(642, 0.05);
  const BvhIndex bvh(mesh);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 p = testing::random_in_ball(rng, 0.08);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : mesh.triangles) {
      const Vec3 q = closest_point_on_triangle(p, mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
      best = std::min(best, (q - p).norm());
    }
    CHECK(bvh.closest_point(p).distance == doctest::Approx(best).epsilon(1e-12));
    // The tessellated sphere sits slightly inside the true one.
    if (p.norm() < 0.045) CHECK(bvh.contains(p));
    if (p.norm() > 0.051) CHECK_FALSE(bvh.contains(p));
  }
}

TEST_CASE("camera model validation") {
  CHECK_NOTHROW(CameraModel{}.validate());
  CHECK_THROWS_AS((CameraModel{180.0, 0.001, 0.2}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((CameraModel{110.0, 0.2, 0.1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((CameraModel{110.0, 0.0, 0.1}.validate()), std::invalid_argument);
}

TEST_CASE("visible_vertices: on-axis, behind and occluded vertices") {
  // Vertex 0 sits 0.5 m ahead of the camera and faces it; vertex 1 is behind
  // the camera. A single triangle (vertices 2-4) can be placed in between.
  TriangleMesh mesh;
  mesh.vertices = {Vec3(0, 0, 0.5), Vec3(0, 0, -0.5), Vec3(-0.1, -0.1, 0.25), Vec3(0.1, -0.1, 0.25),
                   Vec3(0.0, 0.1, 0.25)};
  mesh.normals = {Vec3(0, 0, -1), Vec3(0, 0, 1), Vec3(0, 0, -1), Vec3(0, 0, -1), Vec3(0, 0, -1)};
  VisibilityQuery q;
  q.camera = CameraModel{110.0, 0.001, 1.0};
  q.mode = VisibilityMode::frustum_only;

  auto visible = visible_vertices(q, mesh, nullptr);
  CHECK(std::count(visible.begin(), visible.end(), 0u) == 1);
  CHECK(std::count(visible.begin(), visible.end(), 1u) == 0);

  mesh.triangles = {{2, 3, 4}};
  const BvhIndex bvh(mesh);
  q.mode = VisibilityMode::occlusion;
  visible = visible_vertices(q, mesh, &bvh);
  CHECK(std::count(visible.begin(), visible.end(), 0u) == 0);
  CHECK(visible == testing::brute_force_visible(q, mesh));
  q.mode = VisibilityMode::frustum_only;
  visible = visible_vertices(q, mesh, &bvh);
  CHECK(std::count(visible.begin(), visible.end(), 0u) == 1);
}

TEST_CASE("visible_vertices: back-facing and out-of-range vertices are excluded") {
  TriangleMesh mesh;
  mesh.vertices = {Vec3(0, 0, 0.05), Vec3(0, 0, 0.05), Vec3(0, 0, 0.5), Vec3(0.2, 0, 0.05)};
  mesh.normals = {Vec3(0, 0, -1), Vec3(0, 0, 1), Vec3(0, 0, -1), Vec3(-1, 0, 0)};
  VisibilityQuery q;
  q.mode = VisibilityMode::frustum_only;
  const auto visible = visible_vertices(q, mesh, nullptr);
  // 1 faces away, 2 is beyond the 0.2 m far plane, 3 is outside the 55 degree half-angle.
  CHECK(visible == std::vector<std::uint32_t>{0});
  q.mode = VisibilityMode::occlusion;
  CHECK_THROWS_AS(visible_vertices(q, mesh, nullptr), std::invalid_argument);
}

TEST_CASE("occlusion visibility equals the O(VxT) oracle and is a subset of frustum-only") {
  const auto mesh = testing::cavity_with_obstacle(1000, 0.05, 162, 0.012, Vec3(0.0, 0.005, 0.01));
  REQUIRE(mesh.vertex_count() <= 2000);
  const BvhIndex bvh(mesh);
  std::mt19937_64 rng(1234);
  std::size_t occluded_total = 0;
  for (int pose = 0; pose < 10; ++pose) {
    VisibilityQuery q;
    q.pose.position = testing::random_in_ball(rng, 0.03);
    if ((q.pose.position - Vec3(0.0, 0.005, 0.01)).norm() < 0.015) continue;
    q.pose.orientation = testing::random_rotation(rng);
    q.mode = VisibilityMode::occlusion;
    const auto occl = visible_vertices(q, mesh, &bvh);
    CHECK(occl == testing::brute_force_visible(q, mesh));
    q.mode = VisibilityMode::frustum_only;
    const auto frus = visible_vertices(q, mesh, &bvh);
    CHECK(std::includes(frus.begin(), frus.end(), occl.begin(), occl.end()));
    occluded_total += frus.size() - occl.size();
  }
  CHECK(occluded_total > 0);  // the obstacle actually hides something
}

TEST_CASE("visible set is invariant under a shared rigid motion") {
  const auto mesh = testing::cavity_with_obstacle(642, 0.05, 42, 0.01, Vec3(0.0, 0.0, 0.02));
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    const Quat r = testing::random_rotation(rng);
    const Vec3 t = testing::random_in_ball(rng, 0.5);
    const auto moved = transformed(mesh, r, t);
    const BvhIndex bvh(mesh);
    const BvhIndex moved_bvh(moved);
    VisibilityQuery q;
    q.pose.position = testing::random_in_ball(rng, 0.02);
    q.pose.orientation = testing::random_rotation(rng);
    VisibilityQuery mq = q;
    mq.pose.position = r * q.pose.position + t;
    mq.pose.orientation = r * q.pose.orientation;
    CHECK(visible_vertices(q, mesh, &bvh) == visible_vertices(mq, moved, &moved_bvh));
  }
}

TEST_CASE("visible_vertices skips already-visited vertices") {
  const auto mesh = generate_sphere_phantom(642, 0.05, true);
  const BvhIndex bvh(mesh);
  VisibilityQuery q;
  const auto all = visible_vertices(q, mesh, &bvh);
  REQUIRE(all.size() > 10);
  std::vector<bool> skip(mesh.vertex_count(), false);
  for (std::size_t i = 0; i < all.size(); i += 2) skip[all[i]] = true;
  const auto rest = visible_vertices(q, mesh, &bvh, &skip);
  CHECK(rest.size() == all.size() / 2);
  for (auto i : rest) CHECK_FALSE(skip[i]);
}

TEST_CASE("coverage tracker arithmetic") {
  CoverageTracker tracker(24822);
  std::vector<std::uint32_t> half(12411);
  for (std::uint32_t i = 0; i < half.size(); ++i) half[i] = i;
  CHECK(tracker.mark_and_diff(half) == 50.0);
  CHECK(tracker.current_coverage() == 50.0);
  CHECK(tracker.mark_and_diff(half) == 0.0);
  CHECK(tracker.current_coverage() == 50.0);
  std::vector<std::uint32_t> all(24822);
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
  CHECK(tracker.mark_and_diff(all) == 50.0);
  CHECK(tracker.current_coverage() == 100.0);
  CHECK(tracker.visible_count() == 24822);

  const std::vector<std::uint32_t> bad{5, 24822};
  CHECK_THROWS_AS(tracker.mark_and_diff(bad), std::out_of_range);
  tracker.reset();
  CHECK(tracker.current_coverage() == 0.0);
  CHECK(tracker.visible_count() == 0);
}

TEST_CASE("coverage is monotone and diffs telescope") {
  std::mt19937_64 rng(5);
  CoverageTracker tracker(997);
  std::uniform_int_distribution<std::uint32_t> pick(0, 996);
  double sum = 0.0;
  double last = 0.0;
  for (int round = 0; round < 300; ++round) {
    std::vector<std::uint32_t> seen(rng() % 20);
    for (auto& s : seen) s = pick(rng);
    sum += tracker.mark_and_diff(seen);
    CHECK(tracker.current_coverage() >= last);
    CHECK(tracker.current_coverage() <= 100.0);
    last = tracker.current_coverage();
    std::size_t flagged = 0;
    for (bool v : tracker.visited()) flagged += v;
    CHECK(flagged == tracker.visible_count());
  }
  CHECK(sum == doctest::Approx(tracker.current_coverage()).epsilon(1e-12));
}
