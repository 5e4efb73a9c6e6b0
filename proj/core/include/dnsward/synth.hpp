#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dnsward/dates.hpp"
#include "dnsward/intel.hpp"
#include "dnsward/kvconfig.hpp"
#include "dnsward/net.hpp"
#include "dnsward/query_log.hpp"
#include "dnsward/types.hpp"

namespace dnsward::synth {

struct WeightedName {
  std::string qname;
  double weight = 1.0;
};

// A single user whose risky browsing dominates the org's hostile counts.
struct BadEgg {
  uint32_t user_index = 0;
  double grey_multiplier = 1.0;
  double malicious_multiplier = 1.0;
};

// Repeated high-volume requests for one qname (the poorly-programmed-software
// pattern). Days are consecutive from `start` when set, otherwise drawn
// uniformly from the generation range.
struct Burst {
  std::string qname;
  int n_days = 1;
  uint64_t min_per_day = 100;
  uint64_t max_per_day = 1000;
  std::optional<Date> start;
};

struct InterventionEffect {
  Date date;
  double grey_multiplier = 1.0;
  double malicious_multiplier = 1.0;
};

struct SynthProfile {
  std::string org_id;
  Group group = Group::Treatment;
  uint32_t n_users = 10;
  double per_user_daily_rate = 40.0;  // mean queries/user/day (weekend base)
  double weekday_amplitude = 4.0;     // Mon-Fri rate multiplier
  std::vector<WeightedName> benign_pool, grey_pool, malicious_pool;
  std::vector<BadEgg> bad_eggs;
  std::vector<Burst> bursts;
  std::optional<InterventionEffect> intervention;
};

using RecordSink = std::function<void(const qlog::QueryRecord&)>;

// Deterministic generation: per-org RNG streams derived from the master seed
// by org id, daily Poisson volumes, business-hours (08:00-18:00 UTC)
// timestamps, per-user pool weights with bad-egg multipliers, bursts, and
// post-intervention pool-weight multipliers. Records arrive at the sink in
// chronological order.
void generate(const std::vector<SynthProfile>& profiles, Date from, Date to,
              uint64_t seed, const RecordSink& sink);

std::vector<qlog::QueryRecord> generate_records(const std::vector<SynthProfile>& profiles,
                                                Date from, Date to, uint64_t seed);

// Six-org preset mirroring the studied organisations' qualitative shapes:
// two small quiet control orgs (red, yellow), four larger treatment orgs of
// which green and blue carry bad-egg users, pink a one-week grey episode,
// turquoise the sporadic single-domain burst, and green the torrent/social
// spikes including one constructed double-height day (2018-09-17). All
// domain names are illustrative fictions.
std::vector<SynthProfile> default_profiles();
Date default_from();  // 2018-04-01
Date default_to();    // 2018-11-30
// The constructed double-height malicious day in the default preset.
Date default_spike_date();

// Threat entries matching the profiles' grey/malicious pools, so generation
// and classification cannot drift apart. Grey pool names are listed
// blacklisted+{adware,spyware}; malicious pool names convicted+{malware}.
std::vector<intel::ThreatEntry> bundled_feed(const std::vector<SynthProfile>& profiles);
intel::IntelStore bundled_store(const std::vector<SynthProfile>& profiles);
void write_bundled_feed(const std::vector<SynthProfile>& profiles,
                        const std::string& path);

// Profile files use the service config dialect (see docs/cli.md).
std::vector<SynthProfile> profiles_from_config(const KvConfig& cfg);
struct GenRange {
  Date from, to;
};
std::optional<GenRange> range_from_config(const KvConfig& cfg);

struct ReplayStats {
  uint64_t sent = 0;
  uint64_t answered = 0;
  uint64_t blocked = 0;   // NXDOMAIN answers
  uint64_t timeouts = 0;
};

// Re-encodes records as live queries against each org's endpoint. speedup
// <= 0 disables pacing; otherwise inter-record gaps are real gaps / speedup.
ReplayStats replay(qlog::RecordReader& records,
                   const std::map<std::string, net::Endpoint>& org_endpoints,
                   std::optional<net::Endpoint> fallback,
                   std::chrono::milliseconds reply_timeout, double speedup = 0.0);

}  // namespace dnsward::synth
