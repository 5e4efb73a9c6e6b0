#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dnsward {

// The key-value config dialect shared by the service config and synth
// profile files:
//
//   # comment
//   org.green.listen = 127.0.0.1:5301
//   feeds = [feeds/a.csv, feeds/b.csv]
//
// Keys are dotted paths; lists are bracketed and comma-separated. Repeated
// keys keep the last value.
class KvConfig {
 public:
  static KvConfig parse_file(const std::string& path);        // CONFIG_INVALID / FILE_UNREADABLE
  static KvConfig parse_string(std::string_view text);

  bool has(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, std::string fallback) const;
  std::optional<int64_t> get_int(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  // Bracketed list, or a single bare value treated as a one-element list.
  std::vector<std::string> get_list(const std::string& key) const;

  // Distinct second-level ids under a section: keys "org.green.listen",
  // "org.red.listen" give ids_under("org") == {"green", "red"} (sorted).
  std::vector<std::string> ids_under(const std::string& section) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }
  void set(const std::string& key, std::string value);

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace dnsward
