#include "capscan/learn/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <boost/crc.hpp>
#include <cstring>
#include <fstream>
#include <sstream>

namespace capscan::learn {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put(std::string& buf, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.append(bytes, sizeof(T));
}

template <typename T>
T take(const std::string& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw CheckpointError("checkpoint is truncated");
  char bytes[sizeof(T)];
  std::memcpy(bytes, buf.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

std::uint32_t crc32(const char* data, std::size_t n) {
  boost::crc_32_type crc;
  crc.process_bytes(data, n);
  return crc.checksum();
}

}  // namespace

const Vec& Checkpoint::block(const std::string& name) const {
  for (const auto& [n, v] : blocks) {
    if (n == name) return v;
  }
  throw CheckpointError("checkpoint has no parameter block '" + name + "'");
}

bool Checkpoint::has_block(const std::string& name) const {
  for (const auto& b : blocks) {
    if (b.first == name) return true;
  }
  return false;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  nlohmann::json desc = ckpt.descriptor;
  desc["blocks"] = nlohmann::json::array();
  std::uint64_t total = 0;
  for (const auto& [name, v] : ckpt.blocks) {
    desc["blocks"].push_back({{"name", name}, {"size", v.size()}});
    total += static_cast<std::uint64_t>(v.size());
  }
  const std::string text = desc.dump();

  std::string buf(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint32_t>(buf, kCheckpointVersion);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(text.size()));
  buf += text;
  put<std::uint64_t>(buf, total);
  for (const auto& b : ckpt.blocks) {
    for (Eigen::Index i = 0; i < b.second.size(); ++i) put<double>(buf, b.second[i]);
  }
  put<std::uint32_t>(buf, crc32(buf.data(), buf.size()));
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  write_checkpoint(out, ckpt);
}

Checkpoint read_checkpoint(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  if (buf.size() < sizeof(kCheckpointMagic) + 4 || std::memcmp(buf.data(), kCheckpointMagic, 8) != 0) {
    throw CheckpointError("not a capscan checkpoint (bad magic)");
  }
  std::size_t pos = sizeof(kCheckpointMagic);
  const auto version = take<std::uint32_t>(buf, pos);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  if (buf.size() < 4) throw CheckpointError("checkpoint is truncated");
  std::size_t crc_pos = buf.size() - 4;
  const auto stored = take<std::uint32_t>(buf, crc_pos);
  if (stored != crc32(buf.data(), buf.size() - 4)) throw CheckpointError("checkpoint checksum mismatch");

  const auto desc_len = take<std::uint32_t>(buf, pos);
  if (pos + desc_len > buf.size() - 4) throw CheckpointError("checkpoint is truncated");
  Checkpoint ck;
  try {
    ck.descriptor = nlohmann::json::parse(buf.substr(pos, desc_len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint descriptor is not valid JSON: ") + e.what());
  }
  pos += desc_len;
  const auto total = take<std::uint64_t>(buf, pos);
  if (pos + total * 8 != buf.size() - 4) throw CheckpointError("checkpoint parameter count disagrees with file size");
  std::uint64_t used = 0;
  for (const auto& b : ck.descriptor.at("blocks")) {
    const auto n = b.at("size").get<std::uint64_t>();
    used += n;
    if (used > total) throw CheckpointError("checkpoint blocks exceed the parameter count");
    Vec v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = take<double>(buf, pos);
    ck.blocks.emplace_back(b.at("name").get<std::string>(), std::move(v));
  }
  if (used != total) throw CheckpointError("checkpoint blocks do not cover the parameter count");
  ck.descriptor.erase("blocks");
  return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace capscan::learn
