#include "dnsward/synth.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dnsward/csv.hpp"
#include "dnsward/rng.hpp"
#include "dnsward/wire.hpp"

namespace dnsward::synth {

namespace {

constexpr int64_t kBusinessStart = 8 * 3600;
constexpr int64_t kBusinessSpan = 10 * 3600;  // 08:00-18:00

struct PoolIndex {
  std::vector<std::string> qnames;
  std::vector<double> cumulative;
  double total = 0.0;
};

PoolIndex index_pool(const std::vector<WeightedName>& pool) {
  PoolIndex idx;
  double run = 0.0;
  for (const auto& w : pool) {
    if (w.weight <= 0.0) continue;
    run += w.weight;
    idx.qnames.push_back(w.qname);
    idx.cumulative.push_back(run);
  }
  idx.total = run;
  return idx;
}

struct OrgState {
  const SynthProfile* profile = nullptr;
  Rng rng;
  PoolIndex benign, grey, malicious;
  std::vector<double> egg_grey, egg_mal;           // per user
  std::map<int32_t, std::vector<std::pair<std::string, uint64_t>>> burst_days;

  OrgState(const SynthProfile& p, uint64_t seed)
      : profile(&p), rng(mix_seed(seed, p.org_id)) {}
};

TrafficClass pool_class(const SynthProfile& p, const std::string& qname) {
  for (const auto& w : p.grey_pool) {
    if (w.qname == qname) return TrafficClass::Grey;
  }
  for (const auto& w : p.malicious_pool) {
    if (w.qname == qname) return TrafficClass::Malicious;
  }
  return TrafficClass::Benign;
}

void fill_record_class(qlog::QueryRecord& r, TrafficClass cls) {
  r.cls = cls;
  if (cls == TrafficClass::Grey) {
    r.matched_domain = r.qname;
    r.tags = {"adware", "spyware"};
  } else if (cls == TrafficClass::Malicious) {
    r.matched_domain = r.qname;
    r.tags = {"malware"};
  }
}

}  // namespace

void generate(const std::vector<SynthProfile>& profiles, Date from, Date to,
              uint64_t seed, const RecordSink& sink) {
  if (from > to) fail("CONFIG_INVALID", "generation range is empty");

  std::vector<OrgState> orgs;
  orgs.reserve(profiles.size());
  for (const auto& p : profiles) {
    OrgState state(p, seed);
    state.benign = index_pool(p.benign_pool);
    state.grey = index_pool(p.grey_pool);
    state.malicious = index_pool(p.malicious_pool);
    state.egg_grey.assign(p.n_users, 1.0);
    state.egg_mal.assign(p.n_users, 1.0);
    for (const auto& egg : p.bad_eggs) {
      if (egg.user_index < p.n_users) {
        state.egg_grey[egg.user_index] = egg.grey_multiplier;
        state.egg_mal[egg.user_index] = egg.malicious_multiplier;
      }
    }
    // burst schedules come from a dedicated stream so the main per-day
    // stream is unaffected by burst configuration
    for (size_t bi = 0; bi < p.bursts.size(); ++bi) {
      const Burst& burst = p.bursts[bi];
      Rng burst_rng(mix_seed(mix_seed(seed, p.org_id), "burst#" + std::to_string(bi)));
      std::vector<Date> days;
      if (burst.start) {
        for (int i = 0; i < burst.n_days; ++i) days.push_back(*burst.start + i);
      } else {
        const int32_t span = to - from + 1;
        std::vector<int32_t> offsets(static_cast<size_t>(span));
        for (int32_t i = 0; i < span; ++i) offsets[static_cast<size_t>(i)] = i;
        burst_rng.shuffle(offsets);
        const int n = std::min<int>(burst.n_days, span);
        for (int i = 0; i < n; ++i) days.push_back(from + offsets[static_cast<size_t>(i)]);
        std::sort(days.begin(), days.end());
      }
      for (const Date d : days) {
        if (d < from || d > to) continue;
        const uint64_t volume =
            burst.min_per_day >= burst.max_per_day
                ? burst.min_per_day
                : static_cast<uint64_t>(burst_rng.uniform_int(
                      static_cast<int64_t>(burst.min_per_day),
                      static_cast<int64_t>(burst.max_per_day)));
        state.burst_days[d.days()].emplace_back(burst.qname, volume);
      }
    }
    orgs.push_back(std::move(state));
  }

  std::vector<qlog::QueryRecord> day_records;
  for (Date day = from; day <= to; ++day) {
    day_records.clear();
    const int64_t day_start = to_epoch_seconds(day);
    const bool weekday = !day.is_weekend();

    for (auto& org : orgs) {
      const SynthProfile& p = *org.profile;
      const bool post =
          p.intervention && day >= p.intervention->date;
      const double grey_mult = post ? p.intervention->grey_multiplier : 1.0;
      const double mal_mult = post ? p.intervention->malicious_multiplier : 1.0;

      const double mean = static_cast<double>(p.n_users) * p.per_user_daily_rate *
                          (weekday ? p.weekday_amplitude : 1.0);
      const int64_t count = org.rng.poisson(mean);

      for (int64_t i = 0; i < count; ++i) {
        const uint32_t user =
            p.n_users > 0 ? static_cast<uint32_t>(org.rng.uniform_u64(p.n_users)) : 0;
        const double wb = org.benign.total;
        const double wg = org.grey.total * org.egg_grey[user] * grey_mult;
        const double wm = org.malicious.total * org.egg_mal[user] * mal_mult;
        const double total = wb + wg + wm;
        if (total <= 0.0) continue;

        const double x = org.rng.uniform01() * total;
        const PoolIndex* pool = &org.benign;
        TrafficClass cls = TrafficClass::Benign;
        if (x >= wb && x < wb + wg) {
          pool = &org.grey;
          cls = TrafficClass::Grey;
        } else if (x >= wb + wg) {
          pool = &org.malicious;
          cls = TrafficClass::Malicious;
        }
        if (pool->qnames.empty()) continue;

        qlog::QueryRecord r;
        r.ts = day_start + kBusinessStart +
               static_cast<int64_t>(org.rng.uniform_u64(kBusinessSpan));
        r.org_id = p.org_id;
        r.qname = pool->qnames[org.rng.pick_cumulative(pool->cumulative)];
        r.qtype = wire::kTypeA;
        fill_record_class(r, cls);
        day_records.push_back(std::move(r));
      }

      const auto bursts = org.burst_days.find(day.days());
      if (bursts != org.burst_days.end()) {
        for (const auto& [qname, volume] : bursts->second) {
          const TrafficClass cls = pool_class(p, qname);
          for (uint64_t i = 0; i < volume; ++i) {
            qlog::QueryRecord r;
            r.ts = day_start + kBusinessStart +
                   static_cast<int64_t>(org.rng.uniform_u64(kBusinessSpan));
            r.org_id = p.org_id;
            r.qname = qname;
            r.qtype = wire::kTypeA;
            fill_record_class(r, cls);
            day_records.push_back(std::move(r));
          }
        }
      }
    }

    std::stable_sort(day_records.begin(), day_records.end(),
                     [](const qlog::QueryRecord& a, const qlog::QueryRecord& b) {
                       if (a.ts != b.ts) return a.ts < b.ts;
                       return a.org_id < b.org_id;
                     });
    for (const auto& r : day_records) sink(r);
  }
}

std::vector<qlog::QueryRecord> generate_records(const std::vector<SynthProfile>& profiles,
                                                Date from, Date to, uint64_t seed) {
  std::vector<qlog::QueryRecord> out;
  generate(profiles, from, to, seed, [&](const qlog::QueryRecord& r) { out.push_back(r); });
  return out;
}

// Default preset ---------------------------------------------------------------

Date default_from() { return Date::from_ymd(2018, 4, 1); }
Date default_to() { return Date::from_ymd(2018, 11, 30); }
Date default_spike_date() { return Date::from_ymd(2018, 9, 17); }

namespace {

std::vector<WeightedName> base_benign_pool() {
  return {
      {"www.google.com", 36},       {"mail.google.com", 30},
      {"www.youtube.com", 28},      {"outlook.office365.com", 26},
      {"login.microsoftonline.com", 24}, {"www.facebook.com", 22},
      {"update.microsoft.com", 20}, {"graph.facebook.com", 18},
      {"api.telegram.org", 18},     {"cdn.jsdelivr.net", 16},
      {"fonts.googleapis.com", 16}, {"www.wikipedia.org", 14},
      {"translate.google.com", 13}, {"mail.yandex.ru", 12},
      {"www.dropbox.com", 11},      {"docs.google.com", 11},
      {"drive.google.com", 10},     {"teams.microsoft.com", 9},
      {"edge.microsoft.com", 8},    {"api.whatsapp.com", 8},
      {"maps.google.com", 7},       {"news.mail.ru", 7},
      {"www.instagram.com", 6},     {"avatars.mds.yandex.net", 5},
      {"ctldl.windowsupdate.com", 5},
  };
}

std::vector<WeightedName> grey_pool(double yadro, double fwz1, double other) {
  return {
      {"counter.yadro.ru", yadro},
      {"top-fwz1.mail.ru", fwz1},
      {"an.webtracker.example", other},
      {"pixel.adnet.example", other * 0.6},
      {"cdn.pup-installer.example", other * 0.4},
  };
}

std::vector<WeightedName> malicious_pool(double odno, double torrents, double c2) {
  return {
      {"www.odnoklassniki.ru", odno},
      {"chaturbate.org", torrents},
      {"cams.com", torrents * 0.7},
      {"utorrent.com", torrents * 0.8},
      {"mininova.org", torrents * 0.5},
      {"dbk589trlnxim.cloudfront.net", torrents * 0.4},
      {"c2.beacon.example", c2},
  };
}

}  // namespace

std::vector<SynthProfile> default_profiles() {
  std::vector<SynthProfile> out;

  {
    SynthProfile red;
    red.org_id = "red";
    red.group = Group::Control;
    red.n_users = 5;
    red.per_user_daily_rate = 22;
    red.weekday_amplitude = 3.0;
    red.benign_pool = base_benign_pool();
    red.grey_pool = grey_pool(0.10, 0.05, 0.05);
    red.malicious_pool = malicious_pool(0.02, 0.015, 0.005);
    out.push_back(std::move(red));
  }
  {
    SynthProfile yellow;
    yellow.org_id = "yellow";
    yellow.group = Group::Control;
    yellow.n_users = 4;
    yellow.per_user_daily_rate = 20;
    yellow.weekday_amplitude = 3.0;
    yellow.benign_pool = base_benign_pool();
    yellow.grey_pool = grey_pool(0.06, 0.04, 0.04);
    yellow.malicious_pool = malicious_pool(0.015, 0.01, 0.005);
    out.push_back(std::move(yellow));
  }
  {
    SynthProfile green;
    green.org_id = "green";
    green.group = Group::Treatment;
    green.n_users = 24;
    green.per_user_daily_rate = 45;
    green.weekday_amplitude = 4.0;
    green.benign_pool = base_benign_pool();
    green.grey_pool = grey_pool(1.00, 0.15, 0.25);
    green.malicious_pool = malicious_pool(0.12, 0.10, 0.02);
    green.bad_eggs = {{3, 60.0, 25.0}, {11, 12.0, 8.0}};
    green.bursts = {
        {"www.odnoklassniki.ru", 3, 300, 600, Date::from_ymd(2018, 8, 7)},
        {"www.odnoklassniki.ru", 2, 250, 500, Date::from_ymd(2018, 9, 3)},
        {"chaturbate.org", 1, 600, 900, default_spike_date()},
        {"cams.com", 1, 600, 900, default_spike_date()},
        {"utorrent.com", 1, 600, 900, default_spike_date()},
        {"mininova.org", 1, 600, 900, default_spike_date()},
    };
    out.push_back(std::move(green));
  }
  {
    SynthProfile turquoise;
    turquoise.org_id = "turquoise";
    turquoise.group = Group::Treatment;
    turquoise.n_users = 12;
    turquoise.per_user_daily_rate = 42;
    turquoise.weekday_amplitude = 4.5;
    turquoise.benign_pool = base_benign_pool();
    turquoise.grey_pool = grey_pool(0.45, 0.30, 0.35);
    turquoise.malicious_pool = malicious_pool(0.06, 0.05, 0.01);
    turquoise.bursts = {{"ciip-my.sharepoint.com", 30, 2000, 20000, std::nullopt}};
    out.push_back(std::move(turquoise));
  }
  {
    SynthProfile blue;
    blue.org_id = "blue";
    blue.group = Group::Treatment;
    blue.n_users = 18;
    blue.per_user_daily_rate = 42;
    blue.weekday_amplitude = 4.5;
    blue.benign_pool = base_benign_pool();
    blue.grey_pool = grey_pool(0.30, 1.10, 0.20);
    blue.malicious_pool = malicious_pool(0.08, 0.06, 0.015);
    blue.bad_eggs = {{5, 45.0, 6.0}, {9, 10.0, 3.0}};
    out.push_back(std::move(blue));
  }
  {
    SynthProfile pink;
    pink.org_id = "pink";
    pink.group = Group::Treatment;
    pink.n_users = 9;
    pink.per_user_daily_rate = 40;
    pink.weekday_amplitude = 3.5;
    pink.benign_pool = base_benign_pool();
    pink.grey_pool = grey_pool(0.25, 0.18, 0.12);
    pink.malicious_pool = malicious_pool(0.04, 0.03, 0.01);
    pink.bursts = {
        {"counter.yadro.ru", 7, 300, 600, Date::from_ymd(2018, 10, 15)},
        {"top-fwz1.mail.ru", 7, 150, 300, Date::from_ymd(2018, 10, 15)},
    };
    out.push_back(std::move(pink));
  }
  return out;
}

// Bundled feed -------------------------------------------------------------------

std::vector<intel::ThreatEntry> bundled_feed(const std::vector<SynthProfile>& profiles) {
  std::map<std::string, intel::ThreatEntry> by_domain;
  for (const auto& p : profiles) {
    for (const auto& w : p.grey_pool) {
      auto domain = DomainName::parse(w.qname);
      if (!domain) continue;
      intel::ThreatEntry e;
      e.domain = std::move(*domain);
      e.status = IntelStatus::Blacklisted;
      e.tags = {"adware", "spyware"};
      e.source = "synthetic";
      by_domain.emplace(w.qname, std::move(e));
    }
    for (const auto& w : p.malicious_pool) {
      auto domain = DomainName::parse(w.qname);
      if (!domain) continue;
      intel::ThreatEntry e;
      e.domain = std::move(*domain);
      e.status = IntelStatus::Convicted;
      e.tags = {"malware"};
      e.source = "synthetic";
      by_domain.emplace(w.qname, std::move(e));
    }
  }
  std::vector<intel::ThreatEntry> out;
  out.reserve(by_domain.size());
  for (auto& [_, e] : by_domain) out.push_back(std::move(e));
  return out;
}

intel::IntelStore bundled_store(const std::vector<SynthProfile>& profiles) {
  return intel::IntelStore::merge({bundled_feed(profiles)});
}

void write_bundled_feed(const std::vector<SynthProfile>& profiles, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("IO_ERROR", "cannot write feed: " + path);
  out << "domain,status,tags,source,first_seen\n";
  for (const auto& e : bundled_feed(profiles)) {
    std::string tags;
    for (const auto& t : e.tags) {
      if (!tags.empty()) tags += ';';
      tags += t;
    }
    out << e.domain.to_string() << "," << to_string(e.status) << ","
        << csv_escape(tags) << "," << e.source << ",\n";
  }
}

// Profile config -------------------------------------------------------------------

namespace {

std::vector<WeightedName> parse_pool(const std::vector<std::string>& items,
                                     const std::string& key) {
  std::vector<WeightedName> out;
  for (const auto& item : items) {
    WeightedName w;
    const size_t star = item.find('*');
    if (star == std::string::npos) {
      w.qname = trim(item);
    } else {
      w.qname = trim(item.substr(0, star));
      try {
        w.weight = std::stod(item.substr(star + 1));
      } catch (const std::exception&) {
        fail("CONFIG_INVALID", "bad weight in " + key + ": " + item);
      }
    }
    if (w.qname.empty() || w.weight < 0) {
      fail("CONFIG_INVALID", "bad pool entry in " + key + ": " + item);
    }
    out.push_back(std::move(w));
  }
  return out;
}

std::map<std::string, std::string> parse_kv_tokens(const std::string& value) {
  std::map<std::string, std::string> out;
  std::istringstream ss(value);
  std::string token;
  while (ss >> token) {
    const size_t eq = token.find('=');
    if (eq == std::string::npos) continue;
    out[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return out;
}

}  // namespace

std::vector<SynthProfile> profiles_from_config(const KvConfig& cfg) {
  std::vector<SynthProfile> out;
  for (const auto& id : cfg.ids_under("profile")) {
    const std::string base = "profile." + id + ".";
    SynthProfile p;
    p.org_id = id;
    if (const auto g = cfg.get(base + "group")) {
      const auto group = parse_group(*g);
      if (!group) fail("CONFIG_INVALID", "bad group for profile " + id);
      p.group = *group;
    }
    if (const auto v = cfg.get_int(base + "users")) p.n_users = static_cast<uint32_t>(*v);
    if (const auto v = cfg.get_double(base + "rate")) p.per_user_daily_rate = *v;
    if (const auto v = cfg.get_double(base + "amplitude")) p.weekday_amplitude = *v;
    if (p.n_users == 0 || p.per_user_daily_rate <= 0 || p.weekday_amplitude <= 0) {
      fail("CONFIG_INVALID", "profile " + id + " needs users, rate, amplitude > 0");
    }
    p.benign_pool = parse_pool(cfg.get_list(base + "benign"), base + "benign");
    p.grey_pool = parse_pool(cfg.get_list(base + "grey"), base + "grey");
    p.malicious_pool = parse_pool(cfg.get_list(base + "malicious"), base + "malicious");

    for (const auto& [key, value] : cfg.entries()) {
      if (key.rfind(base + "bad_egg", 0) == 0) {
        const auto kv = parse_kv_tokens(value);
        BadEgg egg;
        if (kv.count("user")) egg.user_index = static_cast<uint32_t>(std::stoul(kv.at("user")));
        if (kv.count("grey")) egg.grey_multiplier = std::stod(kv.at("grey"));
        if (kv.count("malicious")) egg.malicious_multiplier = std::stod(kv.at("malicious"));
        p.bad_eggs.push_back(egg);
      } else if (key.rfind(base + "burst", 0) == 0) {
        const auto kv = parse_kv_tokens(value);
        Burst b;
        if (!kv.count("qname")) fail("CONFIG_INVALID", key + " needs qname=");
        b.qname = kv.at("qname");
        if (kv.count("days")) b.n_days = std::stoi(kv.at("days"));
        if (kv.count("volume")) {
          const std::string& v = kv.at("volume");
          const size_t dash = v.find('-');
          if (dash == std::string::npos) {
            b.min_per_day = b.max_per_day = std::stoull(v);
          } else {
            b.min_per_day = std::stoull(v.substr(0, dash));
            b.max_per_day = std::stoull(v.substr(dash + 1));
          }
        }
        if (kv.count("start")) {
          const auto d = Date::parse(kv.at("start"));
          if (!d) fail("CONFIG_INVALID", key + " has bad start date");
          b.start = *d;
        }
        p.bursts.push_back(std::move(b));
      }
    }
    if (const auto v = cfg.get(base + "intervention")) {
      const auto kv = parse_kv_tokens(*v);
      if (!kv.count("date")) fail("CONFIG_INVALID", base + "intervention needs date=");
      const auto d = Date::parse(kv.at("date"));
      if (!d) fail("CONFIG_INVALID", base + "intervention has bad date");
      InterventionEffect effect;
      effect.date = *d;
      if (kv.count("grey")) effect.grey_multiplier = std::stod(kv.at("grey"));
      if (kv.count("malicious")) effect.malicious_multiplier = std::stod(kv.at("malicious"));
      p.intervention = effect;
    }
    out.push_back(std::move(p));
  }
  if (out.empty()) fail("CONFIG_INVALID", "no profile.* sections in profile config");
  return out;
}

std::optional<GenRange> range_from_config(const KvConfig& cfg) {
  const auto v = cfg.get("range");
  if (!v) return std::nullopt;
  const size_t sep = v->find("..");
  if (sep == std::string::npos) fail("CONFIG_INVALID", "range must be FROM..TO");
  const auto from = Date::parse(trim(v->substr(0, sep)));
  const auto to = Date::parse(trim(v->substr(sep + 2)));
  if (!from || !to || *from > *to) fail("CONFIG_INVALID", "bad range: " + *v);
  return GenRange{*from, *to};
}

// Replay -----------------------------------------------------------------------

ReplayStats replay(qlog::RecordReader& records,
                   const std::map<std::string, net::Endpoint>& org_endpoints,
                   std::optional<net::Endpoint> fallback,
                   std::chrono::milliseconds reply_timeout, double speedup) {
  ReplayStats stats;
  net::UdpSocket sock;
  uint16_t next_id = 1;
  std::optional<int64_t> prev_ts;

  qlog::QueryRecord r;
  while (records.next(r)) {
    const auto ep_it = org_endpoints.find(r.org_id);
    net::Endpoint target;
    if (ep_it != org_endpoints.end()) {
      target = ep_it->second;
    } else if (fallback) {
      target = *fallback;
    } else {
      fail("UNREACHABLE", "no endpoint for org " + r.org_id);
    }

    if (speedup > 0.0 && prev_ts && r.ts > *prev_ts) {
      const double gap_s = static_cast<double>(r.ts - *prev_ts) / speedup;
      std::this_thread::sleep_for(std::chrono::duration<double>(gap_s));
    }
    prev_ts = r.ts;

    auto qname = DomainName::parse(r.qname);
    if (!qname) continue;
    wire::QueryView q;
    q.id = next_id++;
    if (next_id == 0) next_id = 1;
    q.qname = std::move(*qname);
    q.qtype = r.qtype;
    q.qclass = wire::kClassIn;
    const auto raw = wire::encode_query(q);
    sock.send_to(raw, target);
    ++stats.sent;

    const auto deadline = std::chrono::steady_clock::now() + reply_timeout;
    bool got = false;
    for (;;) {
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline) break;
      const auto remaining =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
      auto reply = sock.recv(nullptr, std::max(remaining, std::chrono::milliseconds(1)));
      if (!reply) break;
      const auto meta = wire::parse_response_meta(*reply);
      if (!meta.ok() || meta.value().id != q.id) continue;
      ++stats.answered;
      if (meta.value().rcode == wire::kRcodeNxDomain) ++stats.blocked;
      got = true;
      break;
    }
    if (!got) ++stats.timeouts;
  }
  return stats;
}

}  // namespace dnsward::synth
