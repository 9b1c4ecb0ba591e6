#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "capscan/common/types.hpp"

namespace capscan {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Plain-text configuration: `[section]` headers followed by `key = value`
// lines; `#` starts a comment. Vectors are comma separated. Keys before any
// header live in the "" section.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "<config>");
  static KeyValueConfig parse_string(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& section, const std::string& key, const std::string& value);
  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> raw(const std::string& section, const std::string& key) const;

  // Typed getters return `fallback` when the key is absent and throw
  // ConfigError when it is present but malformed.
  double get(const std::string& section, const std::string& key, double fallback) const;
  long long get_int(const std::string& section, const std::string& key, long long fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  Vec3 get_vec3(const std::string& section, const std::string& key, const Vec3& fallback) const;
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& fallback) const;

  // "section.key" for every entry that no getter has read yet.
  std::vector<std::string> unread_keys() const;

  // Canonical text form: sections and keys sorted, one `key = value` per line.
  std::string dump() const;

  const std::map<std::string, std::map<std::string, std::string>>& sections() const { return sections_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
  mutable std::set<std::pair<std::string, std::string>> read_;
};

// Round-trip text for doubles (shortest representation that parses back to
// the same value).
std::string format_double(double v);

}  // namespace capscan
