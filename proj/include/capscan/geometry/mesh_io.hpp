#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include "capscan/geometry/mesh.hpp"

namespace capscan::geometry {

class MeshIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kUnvisitedColor{255, 0, 0};
inline constexpr Rgb kVisitedColor{0, 0, 255};

// Reads ASCII OBJ (.obj) or binary little-endian PLY (.ply). Missing normals
// are computed by area-weighted face averaging.
TriangleMesh load_mesh(const std::filesystem::path& path);

TriangleMesh load_obj(std::istream& in);
TriangleMesh load_ply(std::istream& in);

// Binary little-endian PLY with float positions/normals and optional
// per-vertex uchar colors.
void save_ply(const std::filesystem::path& path, const TriangleMesh& mesh,
              const std::vector<Rgb>* colors = nullptr);

void save_obj(const std::filesystem::path& path, const TriangleMesh& mesh);

// Per-vertex colors for a coverage snapshot: visited blue, unvisited red.
std::vector<Rgb> coverage_colors(const std::vector<bool>& visited);

}  // namespace capscan::geometry
