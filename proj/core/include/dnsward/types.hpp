#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dnsward {

// Classification of one queried name against the threat-intel store.
enum class TrafficClass : uint8_t { Benign = 0, Grey = 1, Malicious = 2 };

// What the firewall did with a query. Blocked covers every locally
// synthesized answer; Forwarded means the upstream resolver saw it.
enum class Action : uint8_t { Forwarded = 0, Blocked = 1 };

enum class Group : uint8_t { Control = 0, Treatment = 1 };

// Feed entry status, ascending severity.
enum class IntelStatus : uint8_t {
  Allowed = 0,
  Flagged = 1,
  Blacklisted = 2,
  Convicted = 3,
};

std::string_view to_string(TrafficClass c);
std::string_view to_string(Action a);
std::string_view to_string(Group g);
std::string_view to_string(IntelStatus s);

std::optional<TrafficClass> parse_traffic_class(std::string_view s);
std::optional<Action> parse_action(std::string_view s);
std::optional<Group> parse_group(std::string_view s);
std::optional<IntelStatus> parse_intel_status(std::string_view s);

// Runtime error with a stable machine-parseable code. The CLI prints
// "<code>: <message>" on stderr and exits 1.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
  throw Error(std::move(code), message);
}

}  // namespace dnsward
