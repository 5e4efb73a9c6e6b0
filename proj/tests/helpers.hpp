#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "dnsward/intel.hpp"
#include "dnsward/net.hpp"
#include "dnsward/query_log.hpp"
#include "dnsward/rng.hpp"
#include "dnsward/types.hpp"
#include "dnsward/wire.hpp"

namespace testutil {

using namespace dnsward;

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<uint64_t> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dnsward_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Scripted upstream resolver for forwarding tests. Answers every query per
// `mode`, counts datagrams, and remembers qnames so tests can assert that
// blocked names never arrive.
class StubUpstream {
 public:
  enum class Mode {
    Echo,         // NOERROR response echoing the question
    Servfail,     // immediate SERVFAIL
    WrongIdFirst, // first a response with a corrupted id, then the real one
    Silent,       // never answers
  };

  explicit StubUpstream(Mode mode = Mode::Echo)
      : mode_(mode), sock_(net::UdpSocket::bind(*net::Endpoint::parse("127.0.0.1:0"))) {
    endpoint_ = sock_.local_endpoint();
    thread_ = std::jthread([this](std::stop_token st) { run(st); });
  }

  ~StubUpstream() { stop(); }

  void stop() {
    if (thread_.joinable()) {
      thread_.request_stop();
      thread_.join();
    }
  }

  net::Endpoint endpoint() const { return endpoint_; }
  uint64_t packets_seen() const { return packets_; }

  std::vector<std::string> qnames_seen() const {
    std::lock_guard lock(mu_);
    return qnames_;
  }

 private:
  void run(std::stop_token st) {
    while (!st.stop_requested()) {
      net::Endpoint client;
      auto pkt = sock_.recv(&client, std::chrono::milliseconds(50));
      if (!pkt) continue;
      ++packets_;
      auto q = wire::parse_query(*pkt);
      if (!q) continue;
      {
        std::lock_guard lock(mu_);
        qnames_.push_back(q.value().qname.to_string());
      }
      switch (mode_) {
        case Mode::Silent:
          break;
        case Mode::Servfail: {
          sock_.send_to(wire::synthesize_rcode_response(q.value(), wire::kRcodeServFail),
                        client);
          break;
        }
        case Mode::WrongIdFirst: {
          auto wrong = wire::synthesize_rcode_response(q.value(), wire::kRcodeNoError);
          wrong[0] ^= 0xff;  // corrupt the transaction id
          sock_.send_to(wrong, client);
          sock_.send_to(wire::synthesize_rcode_response(q.value(), wire::kRcodeNoError),
                        client);
          break;
        }
        case Mode::Echo: {
          sock_.send_to(wire::synthesize_rcode_response(q.value(), wire::kRcodeNoError),
                        client);
          break;
        }
      }
    }
  }

  Mode mode_;
  net::UdpSocket sock_;
  net::Endpoint endpoint_;
  std::jthread thread_;
  std::atomic<uint64_t> packets_{0};
  mutable std::mutex mu_;
  std::vector<std::string> qnames_;
};

// Brute-force classification oracle: tests every entry for label-boundary
// suffix equality and applies the same severity rule, independent of the
// store's index structure.
inline intel::Verdict oracle_classify(const std::vector<intel::ThreatEntry>& entries,
                                      const intel::IntelStore& store,
                                      const DomainName& name) {
  const intel::ThreatEntry* best = nullptr;       // non-Allowed
  const intel::ThreatEntry* best_allow = nullptr;
  size_t best_depth = 0, best_allow_depth = 0;

  const auto severity = [&](const intel::ThreatEntry& e) {
    switch (store.entry_class(e)) {
      case TrafficClass::Malicious: return 2;
      case TrafficClass::Grey: return 1;
      case TrafficClass::Benign: return 0;
    }
    return 0;
  };

  for (const auto& e : entries) {
    const bool matches = e.exact_only ? e.domain == name : e.domain.is_suffix_of(name);
    if (!matches) continue;
    const size_t depth = e.domain.label_count();
    if (e.status == IntelStatus::Allowed) {
      if (!best_allow || depth > best_allow_depth) {
        best_allow = &e;
        best_allow_depth = depth;
      }
    } else if (!best || depth > best_depth ||
               (depth == best_depth && severity(e) > severity(*best))) {
      best = &e;
      best_depth = depth;
    }
  }

  intel::Verdict v;
  if (best_allow && best_allow_depth >= best_depth) {
    v.cls = TrafficClass::Benign;
    v.matched = *best_allow;
    v.match_depth = best_allow_depth;
  } else if (best) {
    v.cls = store.entry_class(*best);
    v.matched = *best;
    v.match_depth = best_depth;
  }
  return v;
}

inline std::string random_label(Rng& rng, size_t max_len = 10) {
  static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789-_";
  const size_t len = 1 + rng.uniform_u64(max_len);
  std::string out;
  for (size_t i = 0; i < len; ++i) {
    out += alphabet[rng.uniform_u64(sizeof(alphabet) - 1)];
  }
  return out;
}

inline DomainName random_name(Rng& rng, size_t max_labels = 4) {
  for (;;) {
    const size_t n = 1 + rng.uniform_u64(max_labels);
    std::vector<std::string> labels;
    for (size_t i = 0; i < n; ++i) labels.push_back(random_label(rng));
    if (auto name = DomainName::from_labels(std::move(labels))) return *name;
  }
}

// Random store entries over a constrained label alphabet so that random
// query names actually collide with entries.
inline std::vector<intel::ThreatEntry> random_entries(Rng& rng, size_t count) {
  static const std::vector<std::string> tld = {"com", "net", "ru", "org", "example"};
  static const std::vector<std::string> tags = {"malware", "botnet",  "virus", "phishing",
                                                "adware",  "spyware", "tracker", "pup",
                                                "weird",   "unknown"};
  std::vector<intel::ThreatEntry> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    intel::ThreatEntry e;
    std::vector<std::string> labels;
    const size_t n = 1 + rng.uniform_u64(3);
    for (size_t j = 0; j < n; ++j) {
      labels.push_back(random_label(rng, 4));
    }
    labels.push_back(tld[rng.uniform_u64(tld.size())]);
    e.domain = *DomainName::from_labels(std::move(labels));
    e.status = static_cast<IntelStatus>(rng.uniform_u64(4));
    const size_t n_tags = 1 + rng.uniform_u64(2);
    for (size_t j = 0; j < n_tags; ++j) e.tags.insert(tags[rng.uniform_u64(tags.size())]);
    if (e.status == IntelStatus::Allowed && rng.uniform_u64(2) == 0) e.tags.clear();
    e.source = "feed" + std::to_string(rng.uniform_u64(4));
    out.push_back(std::move(e));
  }
  return out;
}

// Query name that has a fair chance of hitting the random store: reuse the
// same alphabet and sometimes extend an entry domain with extra labels.
inline DomainName random_query_name(Rng& rng, const std::vector<intel::ThreatEntry>& entries) {
  if (!entries.empty() && rng.uniform_u64(2) == 0) {
    const auto& base = entries[rng.uniform_u64(entries.size())].domain;
    std::vector<std::string> labels;
    const size_t extra = rng.uniform_u64(3);
    for (size_t i = 0; i < extra; ++i) labels.push_back(random_label(rng, 4));
    labels.insert(labels.end(), base.labels().begin(), base.labels().end());
    if (auto name = DomainName::from_labels(std::move(labels))) return *name;
  }
  static const std::vector<std::string> tld = {"com", "net", "ru", "org", "example"};
  std::vector<std::string> labels;
  const size_t n = 1 + rng.uniform_u64(3);
  for (size_t j = 0; j < n; ++j) labels.push_back(random_label(rng, 4));
  labels.push_back(tld[rng.uniform_u64(tld.size())]);
  return *DomainName::from_labels(std::move(labels));
}

inline qlog::QueryRecord make_record(int64_t ts, const std::string& org,
                                     const std::string& qname, TrafficClass cls) {
  qlog::QueryRecord r;
  r.ts = ts;
  r.org_id = org;
  r.qname = qname;
  r.cls = cls;
  if (cls != TrafficClass::Benign) {
    r.matched_domain = qname;
    r.tags = {cls == TrafficClass::Grey ? "adware" : "malware"};
  }
  return r;
}

inline std::vector<qlog::QueryRecord> random_records(Rng& rng, size_t count,
                                                     Date from = Date::from_ymd(2018, 4, 1),
                                                     int span_days = 60) {
  static const std::vector<std::string> orgs = {"red", "yellow", "green",
                                                "turquoise", "blue", "pink"};
  static const std::vector<std::string> qnames = {
      "www.google.com", "counter.yadro.ru", "top-fwz1.mail.ru", "evil.example",
      "mail.google.com", "update.microsoft.com", "chaturbate.org", "tracker.ads.example"};
  std::vector<qlog::QueryRecord> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    const Date d = from + static_cast<int>(rng.uniform_u64(span_days));
    const int64_t ts = to_epoch_seconds(d) + static_cast<int64_t>(rng.uniform_u64(86400));
    const auto& org = orgs[rng.uniform_u64(orgs.size())];
    const auto& qname = qnames[rng.uniform_u64(qnames.size())];
    const auto cls = static_cast<TrafficClass>(rng.uniform_u64(3));
    out.push_back(make_record(ts, org, qname, cls));
  }
  return out;
}

}  // namespace testutil
