#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dnsward/dates.hpp"
#include "dnsward/domain_name.hpp"
#include "dnsward/types.hpp"

namespace dnsward::intel {

struct ThreatEntry {
  DomainName domain;
  IntelStatus status = IntelStatus::Flagged;
  std::set<std::string> tags;  // lowercase; ordered so merged output is stable
  std::string source;          // ';'-joined sorted feed ids after merging
  std::optional<Date> first_seen;
  bool exact_only = false;     // matches itself only, never subdomains
};

struct Verdict {
  TrafficClass cls = TrafficClass::Benign;
  std::optional<ThreatEntry> matched;
  size_t match_depth = 0;  // labels of the matched entry; 0 when no match
};

// Tag vocabularies are configuration; the feeds only ever name examples.
// Unknown tags contribute to neither set.
struct TagPolicy {
  std::set<std::string> malicious_tags{"malware", "botnet", "virus",
                                       "phishing", "malicious", "c2"};
  std::set<std::string> grey_tags{"adware", "spyware", "tracker", "pup"};
};

struct FeedLoadResult {
  std::vector<ThreatEntry> entries;
  std::vector<std::string> warnings;  // "<path>:<row>: <reason>"
};

struct LoadOptions {
  bool exact_only = false;  // per-feed flag: entries match exactly, no subtrees
};

// Feed CSV, UTF-8, header row required:
//   domain,status,tags,source,first_seen
// tags is a ';'-separated list inside one field; first_seen is YYYY-MM-DD or
// empty. Malformed rows are skipped and reported with their row numbers.
// Throws FILE_UNREADABLE / EMPTY_FEED.
FeedLoadResult load_feed(const std::string& path, const std::string& source,
                         LoadOptions opts = {});

struct StoreStats {
  std::map<IntelStatus, size_t> by_status;
  std::map<std::string, size_t> by_tag;
  size_t entries = 0;
};

// Immutable merged snapshot of all feeds, suffix-searchable by label path.
// Entries with status Allowed are kept in a separate index so a local
// override feed can win against hostile listings at equal or lesser depth.
class IntelStore {
 public:
  IntelStore() = default;

  static IntelStore merge(const std::vector<std::vector<ThreatEntry>>& feeds,
                          TagPolicy policy = {});

  // Deepest label-boundary suffix match wins; at equal depth an Allowed
  // entry wins, otherwise the more severe class. Total and pure.
  Verdict classify(const DomainName& name) const;

  // The class an entry yields when it is the match.
  TrafficClass entry_class(const ThreatEntry& e) const;

  const StoreStats& stats() const { return stats_; }
  size_t size() const { return stats_.entries; }

  // Merged entries in canonical (sorted-by-domain) order.
  std::vector<ThreatEntry> all_entries() const;

 private:
  const ThreatEntry* find(const std::unordered_map<std::string, ThreatEntry>& index,
                          const DomainName& name, size_t depth) const;

  std::unordered_map<std::string, ThreatEntry> entries_;  // non-Allowed statuses
  std::unordered_map<std::string, ThreatEntry> allows_;   // Allowed overrides
  TagPolicy policy_;
  StoreStats stats_;
};

// Recomputed histogram over the merged entries (status and tag totals).
StoreStats store_stats(const IntelStore& store);

}  // namespace dnsward::intel
