#include "dnsward/types.hpp"

#include <algorithm>
#include <cctype>

namespace dnsward {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(TrafficClass c) {
  switch (c) {
    case TrafficClass::Benign: return "benign";
    case TrafficClass::Grey: return "grey";
    case TrafficClass::Malicious: return "malicious";
  }
  return "benign";
}

std::string_view to_string(Action a) {
  return a == Action::Blocked ? "blocked" : "forwarded";
}

std::string_view to_string(Group g) {
  return g == Group::Control ? "control" : "treatment";
}

std::string_view to_string(IntelStatus s) {
  switch (s) {
    case IntelStatus::Allowed: return "allowed";
    case IntelStatus::Flagged: return "flagged";
    case IntelStatus::Blacklisted: return "blacklisted";
    case IntelStatus::Convicted: return "convicted";
  }
  return "flagged";
}

std::optional<TrafficClass> parse_traffic_class(std::string_view s) {
  const std::string v = lower(s);
  if (v == "benign") return TrafficClass::Benign;
  if (v == "grey" || v == "gray") return TrafficClass::Grey;
  if (v == "malicious") return TrafficClass::Malicious;
  return std::nullopt;
}

std::optional<Action> parse_action(std::string_view s) {
  const std::string v = lower(s);
  if (v == "forwarded") return Action::Forwarded;
  if (v == "blocked") return Action::Blocked;
  return std::nullopt;
}

std::optional<Group> parse_group(std::string_view s) {
  const std::string v = lower(s);
  if (v == "control") return Group::Control;
  if (v == "treatment") return Group::Treatment;
  return std::nullopt;
}

std::optional<IntelStatus> parse_intel_status(std::string_view s) {
  const std::string v = lower(s);
  if (v == "allowed") return IntelStatus::Allowed;
  if (v == "flagged") return IntelStatus::Flagged;
  if (v == "blacklisted") return IntelStatus::Blacklisted;
  if (v == "convicted") return IntelStatus::Convicted;
  return std::nullopt;
}

}  // namespace dnsward
