#include "capscan/common/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace capscan {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

double parse_number(const std::string& text, const std::string& what) {
  const auto t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(what + ": expected a number, got '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, ',')) parts.push_back(trim(cur));
  return parts;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source) {
  KeyValueConfig cfg;
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    cfg.sections_[section][key] = unquote(trim(line.substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in, path.string());
}

void KeyValueConfig::set(const std::string& section, const std::string& key, const std::string& value) {
  sections_[section][key] = value;
}

bool KeyValueConfig::has(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) > 0;
}

std::optional<std::string> KeyValueConfig::raw(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return std::nullopt;
  auto kt = it->second.find(key);
  if (kt == it->second.end()) return std::nullopt;
  read_.insert({section, key});
  return kt->second;
}

double KeyValueConfig::get(const std::string& section, const std::string& key, double fallback) const {
  const auto v = raw(section, key);
  return v ? parse_number(*v, section + "." + key) : fallback;
}

long long KeyValueConfig::get_int(const std::string& section, const std::string& key, long long fallback) const {
  const auto v = raw(section, key);
  if (!v) return fallback;
  const double d = parse_number(*v, section + "." + key);
  if (d != static_cast<double>(static_cast<long long>(d))) {
    throw ConfigError(section + "." + key + ": expected an integer, got '" + *v + "'");
  }
  return static_cast<long long>(d);
}

bool KeyValueConfig::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const auto v = raw(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError(section + "." + key + ": expected a boolean, got '" + *v + "'");
}

std::string KeyValueConfig::get_string(const std::string& section, const std::string& key,
                                       const std::string& fallback) const {
  const auto v = raw(section, key);
  return v ? *v : fallback;
}

Vec3 KeyValueConfig::get_vec3(const std::string& section, const std::string& key, const Vec3& fallback) const {
  const auto list = get_list(section, key, {fallback.x(), fallback.y(), fallback.z()});
  if (list.size() != 3) throw ConfigError(section + "." + key + ": expected 3 components");
  return {list[0], list[1], list[2]};
}

std::vector<double> KeyValueConfig::get_list(const std::string& section, const std::string& key,
                                             const std::vector<double>& fallback) const {
  const auto v = raw(section, key);
  if (!v) return fallback;
  std::string body = *v;
  if (!body.empty() && body.front() == '[' && body.back() == ']') body = body.substr(1, body.size() - 2);
  std::vector<double> out;
  for (const auto& part : split_commas(body)) out.push_back(parse_number(part, section + "." + key));
  return out;
}

std::vector<std::string> KeyValueConfig::unread_keys() const {
  std::vector<std::string> out;
  for (const auto& [section, entries] : sections_) {
    for (const auto& [key, value] : entries) {
      if (!read_.count({section, key})) out.push_back(section.empty() ? key : section + "." + key);
    }
  }
  return out;
}

std::string KeyValueConfig::dump() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, entries] : sections_) {
    if (!section.empty()) {
      if (!first) out << '\n';
      out << '[' << section << "]\n";
    }
    for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
    first = false;
  }
  return out.str();
}

}  // namespace capscan
