#include "capscan/geometry/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace capscan::geometry {

static_assert(std::endian::native == std::endian::little, "PLY I/O assumes a little-endian host");

namespace {

std::string lower_ext(const std::filesystem::path& p) {
  auto e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

void finish(TriangleMesh& mesh) {
  if (mesh.vertices.empty()) throw MeshIoError("mesh has zero vertices");
  const auto n = mesh.vertices.size();
  for (const auto& t : mesh.triangles) {
    for (auto i : t) {
      if (i >= n) throw MeshIoError("face references vertex " + std::to_string(i) + " of " + std::to_string(n));
    }
  }
  if (mesh.normals.size() != n) {
    mesh.normals = compute_vertex_normals(mesh.vertices, mesh.triangles);
  } else {
    const auto fallback = compute_vertex_normals(mesh.vertices, mesh.triangles);
    for (std::size_t i = 0; i < n; ++i) {
      const double len = mesh.normals[i].norm();
      mesh.normals[i] = len > 0.0 ? Vec3(mesh.normals[i] / len) : fallback[i];
    }
  }
}

// "7", "7/2", "7//3", "7/2/3" -> (vertex, normal) with 1-based or negative
// OBJ indexing resolved to 0-based.
std::pair<long, long> parse_obj_ref(const std::string& tok, std::size_t nv, std::size_t nn) {
  auto resolve = [](long idx, std::size_t count) -> long {
    if (idx > 0) return idx - 1;
    if (idx < 0) return static_cast<long>(count) + idx;
    throw MeshIoError("OBJ index 0 is invalid");
  };
  const auto s1 = tok.find('/');
  long v = resolve(std::stol(tok.substr(0, s1)), nv);
  long n = -1;
  if (s1 != std::string::npos) {
    const auto s2 = tok.find('/', s1 + 1);
    if (s2 != std::string::npos && s2 + 1 < tok.size()) n = resolve(std::stol(tok.substr(s2 + 1)), nn);
  }
  return {v, n};
}

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

PlyType parse_ply_type(const std::string& s) {
  if (s == "char" || s == "int8") return PlyType::i8;
  if (s == "uchar" || s == "uint8") return PlyType::u8;
  if (s == "short" || s == "int16") return PlyType::i16;
  if (s == "ushort" || s == "uint16") return PlyType::u16;
  if (s == "int" || s == "int32") return PlyType::i32;
  if (s == "uint" || s == "uint32") return PlyType::u32;
  if (s == "float" || s == "float32") return PlyType::f32;
  if (s == "double" || s == "float64") return PlyType::f64;
  throw MeshIoError("unknown PLY type '" + s + "'");
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::i8:
    case PlyType::u8: return 1;
    case PlyType::i16:
    case PlyType::u16: return 2;
    case PlyType::i32:
    case PlyType::u32:
    case PlyType::f32: return 4;
    case PlyType::f64: return 8;
  }
  return 0;
}

template <typename T>
T read_raw(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw MeshIoError("unexpected end of PLY body");
  return v;
}

double read_ply_value(std::istream& in, PlyType t) {
  switch (t) {
    case PlyType::i8: return read_raw<std::int8_t>(in);
    case PlyType::u8: return read_raw<std::uint8_t>(in);
    case PlyType::i16: return read_raw<std::int16_t>(in);
    case PlyType::u16: return read_raw<std::uint16_t>(in);
    case PlyType::i32: return read_raw<std::int32_t>(in);
    case PlyType::u32: return read_raw<std::uint32_t>(in);
    case PlyType::f32: return read_raw<float>(in);
    case PlyType::f64: return read_raw<double>(in);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::f32;
  bool is_list = false;
  PlyType count_type = PlyType::u8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

template <typename T>
void write_raw(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

TriangleMesh load_obj(std::istream& in) {
  TriangleMesh mesh;
  std::vector<Vec3> file_normals;
  std::vector<long> normal_of_vertex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) throw MeshIoError("bad vertex on line " + std::to_string(line_no));
      mesh.vertices.push_back(p);
    } else if (tag == "vn") {
      Vec3 n;
      if (!(ls >> n.x() >> n.y() >> n.z())) throw MeshIoError("bad normal on line " + std::to_string(line_no));
      file_normals.push_back(n);
    } else if (tag == "f") {
      std::vector<std::string> refs;
      for (std::string tok; ls >> tok;) refs.push_back(tok);
      if (refs.size() != 3) throw MeshIoError("non-triangle face on line " + std::to_string(line_no));
      Triangle t{};
      normal_of_vertex.resize(mesh.vertices.size(), -1);
      for (int k = 0; k < 3; ++k) {
        const auto [v, n] = parse_obj_ref(refs[k], mesh.vertices.size(), file_normals.size());
        if (v < 0 || static_cast<std::size_t>(v) >= mesh.vertices.size()) {
          throw MeshIoError("face index out of range on line " + std::to_string(line_no));
        }
        t[k] = static_cast<std::uint32_t>(v);
        if (n >= 0 && normal_of_vertex[v] < 0) normal_of_vertex[v] = n;
      }
      mesh.triangles.push_back(t);
    }
  }
  if (!file_normals.empty()) {
    normal_of_vertex.resize(mesh.vertices.size(), -1);
    const bool complete = std::all_of(normal_of_vertex.begin(), normal_of_vertex.end(), [&](long n) {
      return n >= 0 && static_cast<std::size_t>(n) < file_normals.size();
    });
    if (complete) {
      for (auto n : normal_of_vertex) mesh.normals.push_back(file_normals[n]);
    }
  }
  finish(mesh);
  return mesh;
}

TriangleMesh load_ply(std::istream& in) {
  std::string line;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0) throw MeshIoError("missing PLY magic");
  std::vector<PlyElement> elements;
  bool binary_le = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      binary_le = fmt == "binary_little_endian";
    } else if (word == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (word == "property") {
      if (elements.empty()) throw MeshIoError("PLY property before element");
      PlyProperty p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string ct, it;
        ls >> ct >> it >> p.name;
        p.is_list = true;
        p.count_type = parse_ply_type(ct);
        p.type = parse_ply_type(it);
      } else {
        p.type = parse_ply_type(type);
        ls >> p.name;
      }
      elements.back().props.push_back(p);
    } else if (word == "end_header") {
      break;
    }
  }
  if (!binary_le) throw MeshIoError("only binary_little_endian PLY is supported");

  TriangleMesh mesh;
  bool has_normals = false;
  for (const auto& e : elements) {
    if (e.name == "vertex") {
      mesh.vertices.resize(e.count);
      std::vector<Vec3> normals(e.count, Vec3::Zero());
      for (const auto& p : e.props) has_normals |= p.name == "nx";
      for (std::size_t i = 0; i < e.count; ++i) {
        for (const auto& p : e.props) {
          if (p.is_list) {
            const auto cnt = static_cast<std::size_t>(read_ply_value(in, p.count_type));
            in.ignore(static_cast<std::streamsize>(cnt * ply_size(p.type)));
            continue;
          }
          const double v = read_ply_value(in, p.type);
          if (p.name == "x") mesh.vertices[i].x() = v;
          else if (p.name == "y") mesh.vertices[i].y() = v;
          else if (p.name == "z") mesh.vertices[i].z() = v;
          else if (p.name == "nx") normals[i].x() = v;
          else if (p.name == "ny") normals[i].y() = v;
          else if (p.name == "nz") normals[i].z() = v;
        }
      }
      if (has_normals) mesh.normals = std::move(normals);
    } else if (e.name == "face") {
      mesh.triangles.reserve(e.count);
      for (std::size_t i = 0; i < e.count; ++i) {
        for (const auto& p : e.props) {
          if (!p.is_list) {
            read_ply_value(in, p.type);
            continue;
          }
          const auto cnt = static_cast<std::size_t>(read_ply_value(in, p.count_type));
          if (p.name != "vertex_indices" && p.name != "vertex_index") {
            in.ignore(static_cast<std::streamsize>(cnt * ply_size(p.type)));
            continue;
          }
          if (cnt != 3) throw MeshIoError("non-triangle face (" + std::to_string(cnt) + " vertices) at face " + std::to_string(i));
          Triangle t{};
          for (auto& idx : t) {
            const double v = read_ply_value(in, p.type);
            if (v < 0) throw MeshIoError("negative face index");
            idx = static_cast<std::uint32_t>(v);
          }
          mesh.triangles.push_back(t);
        }
      }
    } else {
      for (std::size_t i = 0; i < e.count; ++i) {
        for (const auto& p : e.props) {
          if (p.is_list) {
            const auto cnt = static_cast<std::size_t>(read_ply_value(in, p.count_type));
            in.ignore(static_cast<std::streamsize>(cnt * ply_size(p.type)));
          } else {
            in.ignore(static_cast<std::streamsize>(ply_size(p.type)));
          }
        }
      }
    }
  }
  finish(mesh);
  return mesh;
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  const auto ext = lower_ext(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MeshIoError("cannot open mesh file " + path.string());
  if (ext == ".obj") return load_obj(in);
  if (ext == ".ply") return load_ply(in);
  throw MeshIoError("unsupported mesh extension '" + ext + "'");
}

void save_ply(const std::filesystem::path& path, const TriangleMesh& mesh, const std::vector<Rgb>* colors) {
  if (colors && colors->size() != mesh.vertices.size()) {
    throw std::invalid_argument("color count does not match vertex count");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MeshIoError("cannot write " + path.string());
  const bool normals = mesh.normals.size() == mesh.vertices.size();
  out << "ply\nformat binary_little_endian 1.0\ncomment capscan mesh v1\n";
  out << "element vertex " << mesh.vertices.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (normals) out << "property float nx\nproperty float ny\nproperty float nz\n";
  if (colors) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "element face " << mesh.triangles.size() << "\n";
  out << "property list uchar int vertex_indices\nend_header\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    for (int k = 0; k < 3; ++k) write_raw(out, static_cast<float>(mesh.vertices[i][k]));
    if (normals) {
      for (int k = 0; k < 3; ++k) write_raw(out, static_cast<float>(mesh.normals[i][k]));
    }
    if (colors) {
      for (auto c : (*colors)[i]) write_raw(out, c);
    }
  }
  for (const auto& t : mesh.triangles) {
    write_raw<std::uint8_t>(out, 3);
    for (auto i : t) write_raw(out, static_cast<std::int32_t>(i));
  }
  if (!out) throw MeshIoError("write failed for " + path.string());
}

void save_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw MeshIoError("cannot write " + path.string());
  out.precision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& n : mesh.normals) out << "vn " << n.x() << ' ' << n.y() << ' ' << n.z() << '\n';
  const bool normals = mesh.normals.size() == mesh.vertices.size();
  for (const auto& t : mesh.triangles) {
    out << 'f';
    for (auto i : t) {
      out << ' ' << i + 1;
      if (normals) out << "//" << i + 1;
    }
    out << '\n';
  }
}

std::vector<Rgb> coverage_colors(const std::vector<bool>& visited) {
  std::vector<Rgb> colors(visited.size());
  for (std::size_t i = 0; i < visited.size(); ++i) colors[i] = visited[i] ? kVisitedColor : kUnvisitedColor;
  return colors;
}

}  // namespace capscan::geometry
