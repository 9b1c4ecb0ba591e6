#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "capscan/common/types.hpp"
#include "json.hpp"

namespace capscan::learn {

inline constexpr char kCheckpointMagic[8] = {'C', 'A', 'P', 'S', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Named flat parameter blocks plus a JSON architecture descriptor.
//
// File layout (little endian):
//   magic[8] | u32 version | u32 descriptor bytes | descriptor JSON |
//   u64 parameter count | f64 parameters... | u32 CRC-32 of all prior bytes
// The descriptor lists the blocks in order with their sizes.
struct Checkpoint {
  nlohmann::json descriptor = nlohmann::json::object();
  std::vector<std::pair<std::string, Vec>> blocks;

  const Vec& block(const std::string& name) const;
  bool has_block(const std::string& name) const;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws CheckpointError on bad magic, unsupported version, truncation or a
// checksum mismatch.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace capscan::learn
