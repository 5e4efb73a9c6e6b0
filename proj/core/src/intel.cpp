#include "dnsward/intel.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dnsward/csv.hpp"

namespace dnsward::intel {

namespace {

std::string lower(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

std::set<std::string> parse_tags(std::string_view field) {
  std::set<std::string> tags;
  std::string cur;
  std::istringstream ss{std::string(field)};
  while (std::getline(ss, cur, ';')) {
    const std::string tag = lower(trim(cur));
    if (!tag.empty()) tags.insert(tag);
  }
  return tags;
}

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  for (const auto& t : small) {
    if (large.count(t)) return true;
  }
  return false;
}

// Union of ';'-joined source lists, sorted and deduplicated, so merge output
// is independent of feed order.
std::string merge_sources(const std::string& a, const std::string& b) {
  std::set<std::string> ids;
  for (const std::string* s : {&a, &b}) {
    std::string cur;
    std::istringstream ss(*s);
    while (std::getline(ss, cur, ';')) {
      if (!cur.empty()) ids.insert(cur);
    }
  }
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += ';';
    out += id;
  }
  return out;
}

void merge_into(std::unordered_map<std::string, ThreatEntry>& index,
                const ThreatEntry& entry) {
  const std::string key = entry.domain.to_string();
  auto [it, inserted] = index.try_emplace(key, entry);
  if (inserted) return;
  ThreatEntry& merged = it->second;
  merged.status = std::max(merged.status, entry.status);
  merged.tags.insert(entry.tags.begin(), entry.tags.end());
  merged.source = merge_sources(merged.source, entry.source);
  if (entry.first_seen && (!merged.first_seen || *entry.first_seen < *merged.first_seen)) {
    merged.first_seen = entry.first_seen;
  }
  // any subtree-matching listing widens the merged entry
  merged.exact_only = merged.exact_only && entry.exact_only;
}

}  // namespace

FeedLoadResult load_feed(const std::string& path, const std::string& source,
                         LoadOptions opts) {
  std::ifstream in(path);
  if (!in) fail("FILE_UNREADABLE", "cannot open feed: " + path);

  FeedLoadResult result;
  std::string line;
  int row = 0;
  bool saw_header = false;

  auto warn = [&](int r, const std::string& reason) {
    result.warnings.push_back(path + ":" + std::to_string(r) + ": " + reason);
  };

  while (getline_text(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    if (!saw_header) {
      saw_header = true;
      const auto header = split_csv_line(line);
      if (header.empty() || lower(trim(header[0])) != "domain") {
        warn(row, "missing header row 'domain,status,tags,source,first_seen'");
      }
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() < 4 || fields.size() > 5) {
      warn(row, "expected 4 or 5 columns, got " + std::to_string(fields.size()));
      continue;
    }
    auto domain = DomainName::parse(trim(fields[0]));
    if (!domain || domain->is_root()) {
      warn(row, "invalid domain: " + trim(fields[0]));
      continue;
    }
    const auto status = parse_intel_status(trim(fields[1]));
    if (!status) {
      warn(row, "unknown status: " + trim(fields[1]));
      continue;
    }
    ThreatEntry entry;
    entry.domain = std::move(*domain);
    entry.status = *status;
    entry.tags = parse_tags(fields[2]);
    if (entry.tags.empty() && entry.status != IntelStatus::Allowed) {
      warn(row, "untagged " + std::string(to_string(entry.status)) + " entry");
      continue;
    }
    const std::string row_source = trim(fields[3]);
    entry.source = row_source.empty() ? source : row_source;
    if (fields.size() == 5) {
      const std::string fs = trim(fields[4]);
      if (!fs.empty()) {
        const auto date = Date::parse(fs);
        if (!date) {
          warn(row, "bad first_seen date: " + fs);
          continue;
        }
        entry.first_seen = *date;
      }
    }
    entry.exact_only = opts.exact_only;
    result.entries.push_back(std::move(entry));
  }

  if (result.entries.empty()) {
    fail("EMPTY_FEED", "no well-formed rows in feed: " + path);
  }
  return result;
}

IntelStore IntelStore::merge(const std::vector<std::vector<ThreatEntry>>& feeds,
                             TagPolicy policy) {
  IntelStore store;
  store.policy_ = std::move(policy);
  for (const auto& feed : feeds) {
    for (const auto& entry : feed) {
      if (entry.status == IntelStatus::Allowed) {
        merge_into(store.allows_, entry);
      } else {
        merge_into(store.entries_, entry);
      }
    }
  }
  StoreStats stats;
  for (const auto* index : {&store.entries_, &store.allows_}) {
    for (const auto& [_, e] : *index) {
      ++stats.entries;
      ++stats.by_status[e.status];
      for (const auto& t : e.tags) ++stats.by_tag[t];
    }
  }
  store.stats_ = std::move(stats);
  return store;
}

TrafficClass IntelStore::entry_class(const ThreatEntry& e) const {
  if (e.status == IntelStatus::Allowed) return TrafficClass::Benign;
  const bool hostile_status =
      e.status == IntelStatus::Blacklisted || e.status == IntelStatus::Convicted;
  if (hostile_status && intersects(e.tags, policy_.malicious_tags)) {
    return TrafficClass::Malicious;
  }
  if (intersects(e.tags, policy_.grey_tags)) return TrafficClass::Grey;
  return TrafficClass::Benign;
}

const ThreatEntry* IntelStore::find(
    const std::unordered_map<std::string, ThreatEntry>& index, const DomainName& name,
    size_t depth) const {
  if (index.empty()) return nullptr;
  std::string key;
  const auto& labels = name.labels();
  for (size_t i = labels.size() - depth; i < labels.size(); ++i) {
    if (!key.empty()) key += '.';
    key += labels[i];
  }
  const auto it = index.find(key);
  if (it == index.end()) return nullptr;
  if (it->second.exact_only && depth != name.label_count()) return nullptr;
  return &it->second;
}

Verdict IntelStore::classify(const DomainName& name) const {
  // Walk suffixes deepest-first; the first hit in either index is the
  // deepest match at that depth.
  for (size_t depth = name.label_count(); depth >= 1; --depth) {
    const ThreatEntry* allowed = find(allows_, name, depth);
    if (allowed) {
      // Allowed beats anything at this depth or below.
      Verdict v;
      v.cls = TrafficClass::Benign;
      v.matched = *allowed;
      v.match_depth = depth;
      return v;
    }
    const ThreatEntry* hit = find(entries_, name, depth);
    if (hit) {
      Verdict v;
      v.cls = entry_class(*hit);
      v.matched = *hit;
      v.match_depth = depth;
      return v;
    }
  }
  return Verdict{};
}

std::vector<ThreatEntry> IntelStore::all_entries() const {
  std::vector<ThreatEntry> out;
  out.reserve(stats_.entries);
  for (const auto* index : {&entries_, &allows_}) {
    for (const auto& [_, e] : *index) out.push_back(e);
  }
  // a domain can appear in both indexes (hostile listing plus allow
  // override); order those pairs by status for a stable result
  std::sort(out.begin(), out.end(), [](const ThreatEntry& a, const ThreatEntry& b) {
    const auto ka = std::pair(a.domain.to_string(), a.status);
    const auto kb = std::pair(b.domain.to_string(), b.status);
    return ka < kb;
  });
  return out;
}

StoreStats store_stats(const IntelStore& store) { return store.stats(); }

}  // namespace dnsward::intel
