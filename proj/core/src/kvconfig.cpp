#include "dnsward/kvconfig.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dnsward/csv.hpp"
#include "dnsward/types.hpp"

namespace dnsward {

KvConfig KvConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("FILE_UNREADABLE", "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

KvConfig KvConfig::parse_string(std::string_view text) {
  KvConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (getline_text(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      fail("CONFIG_INVALID", "line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) {
      fail("CONFIG_INVALID", "line " + std::to_string(lineno) + ": empty key");
    }
    cfg.entries_[key] = value;
  }
  return cfg;
}

bool KvConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::optional<std::string> KvConfig::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string KvConfig::get_or(const std::string& key, std::string fallback) const {
  const auto v = get(key);
  return v ? *v : std::move(fallback);
}

std::optional<int64_t> KvConfig::get_int(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    fail("CONFIG_INVALID", "key '" + key + "' is not an integer: " + *v);
  }
  return out;
}

std::optional<double> KvConfig::get_double(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  try {
    size_t pos = 0;
    const double out = std::stod(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument(*v);
    return out;
  } catch (const std::exception&) {
    fail("CONFIG_INVALID", "key '" + key + "' is not a number: " + *v);
  }
}

std::optional<bool> KvConfig::get_bool(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "yes" || *v == "1") return true;
  if (*v == "false" || *v == "no" || *v == "0") return false;
  fail("CONFIG_INVALID", "key '" + key + "' is not a boolean: " + *v);
}

std::vector<std::string> KvConfig::get_list(const std::string& key) const {
  const auto v = get(key);
  if (!v) return {};
  std::string body = *v;
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']') fail("CONFIG_INVALID", "unterminated list for key '" + key + "'");
    body = body.substr(1, body.size() - 2);
  }
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(body);
  while (std::getline(ss, cur, ',')) {
    const std::string item = trim(cur);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::string> KvConfig::ids_under(const std::string& section) const {
  const std::string prefix = section + ".";
  std::vector<std::string> ids;
  for (const auto& [key, _] : entries_) {
    if (key.rfind(prefix, 0) != 0) continue;
    const size_t dot = key.find('.', prefix.size());
    if (dot == std::string::npos) continue;
    const std::string id = key.substr(prefix.size(), dot - prefix.size());
    if (ids.empty() || ids.back() != id) ids.push_back(id);
  }
  return ids;  // map iteration is sorted; adjacent dupes collapsed above
}

void KvConfig::set(const std::string& key, std::string value) {
  entries_[key] = std::move(value);
}

}  // namespace dnsward
