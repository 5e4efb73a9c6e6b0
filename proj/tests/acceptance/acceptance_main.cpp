// Acceptance suite: one check per release criterion, each printing a single
// PASS/FAIL line with the measured values. Run everything with no arguments
// or a single criterion with --criterion N. Exits with the failure count.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dnsward/analytics.hpp"
#include "dnsward/firewall.hpp"
#include "dnsward/intervention.hpp"
#include "dnsward/query_log.hpp"
#include "dnsward/report.hpp"
#include "dnsward/synth.hpp"
#include "dnsward/wire.hpp"
#include "helpers.hpp"

using namespace dnsward;
using testutil::StubUpstream;
using testutil::TempDir;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// ---- criterion 1: wire codec fuzz + round-trip --------------------------------

Outcome criterion1() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(0xC0DEC);

  // 10^6 arbitrary inputs: uniform junk, mutated real queries, pointer jungles
  size_t parsed_ok = 0;
  for (size_t i = 0; i < 1'000'000; ++i) {
    std::vector<uint8_t> input;
    const int flavor = static_cast<int>(i % 4);
    if (flavor == 0) {
      input.resize(rng.uniform_u64(wire::kMaxDatagram + 1));
      for (auto& b : input) b = static_cast<uint8_t>(rng.next_u64());
    } else if (flavor == 1) {
      input.resize(rng.uniform_u64(64));
      for (auto& b : input) b = static_cast<uint8_t>(rng.next_u64());
    } else if (flavor == 2) {
      wire::QueryView q;
      q.id = static_cast<uint16_t>(rng.uniform_u64(65536));
      q.qname = testutil::random_name(rng, 5);
      input = wire::encode_query(q);
      const size_t flips = 1 + rng.uniform_u64(6);
      for (size_t f = 0; f < flips && !input.empty(); ++f) {
        input[rng.uniform_u64(input.size())] = static_cast<uint8_t>(rng.next_u64());
      }
    } else {
      // compression-pointer soup after a plausible header
      input = {0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0};
      const size_t n = 2 + rng.uniform_u64(40);
      for (size_t f = 0; f < n; ++f) {
        if (rng.uniform_u64(2) == 0) {
          input.push_back(static_cast<uint8_t>(0xC0 | rng.uniform_u64(0x40)));
          input.push_back(static_cast<uint8_t>(rng.uniform_u64(64)));
        } else {
          input.push_back(static_cast<uint8_t>(rng.uniform_u64(8)));
          input.push_back(static_cast<uint8_t>('a' + rng.uniform_u64(26)));
        }
      }
    }
    const auto q = wire::parse_query(input);
    if (q.ok()) ++parsed_ok;
    (void)wire::parse_response_meta(input);
  }

  // 10^4 valid queries round-trip exactly
  size_t roundtrip_failures = 0;
  for (size_t i = 0; i < 10'000; ++i) {
    wire::QueryView q;
    q.id = static_cast<uint16_t>(rng.uniform_u64(65536));
    q.qname = testutil::random_name(rng, 6);
    q.qtype = rng.uniform_u64(2) ? wire::kTypeA : wire::kTypeAaaa;
    q.recursion_desired = rng.uniform_u64(2) == 0;
    const auto encoded = wire::encode_query(q);
    const auto parsed = wire::parse_query(encoded);
    if (!parsed.ok() || !(parsed.value() == q) ||
        wire::encode_query(parsed.value()) != encoded) {
      ++roundtrip_failures;
    }
  }

  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = roundtrip_failures == 0 && elapsed < 60.0;
  out.detail = "1e6 fuzz inputs (no crash, " + std::to_string(parsed_ok) +
               " parsed), 1e4 round-trips (" + std::to_string(roundtrip_failures) +
               " failures), " + fmt(elapsed) + "s (<60s)";
  return out;
}

// ---- criterion 2: classifier vs brute-force oracle -----------------------------

Outcome criterion2() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(0x02ac1e);

  auto entries = testutil::random_entries(rng, 10'000);
  // adversarial structure: boundary lookalikes and nested chains
  const auto add = [&](const std::string& d, IntelStatus s, std::set<std::string> tags) {
    intel::ThreatEntry e;
    e.domain = *DomainName::parse(d);
    e.status = s;
    e.tags = std::move(tags);
    e.source = "adv";
    entries.push_back(std::move(e));
  };
  add("foo.com", IntelStatus::Convicted, {"malware"});
  add("ads.example", IntelStatus::Blacklisted, {"adware"});
  add("bad.ads.example", IntelStatus::Convicted, {"malware", "botnet"});
  add("deep.bad.ads.example", IntelStatus::Flagged, {"tracker"});
  add("allow.ads.example", IntelStatus::Allowed, {});

  const auto store = intel::IntelStore::merge({entries});
  const auto merged = store.all_entries();

  std::vector<DomainName> queries;
  for (size_t i = 0; i < 1000; ++i) {
    queries.push_back(testutil::random_query_name(rng, entries));
  }
  for (const auto& adv :
       {"foo.com", "xfoo.com", "a.foo.com", "afoo.com", "x.bad.ads.example",
        "y.ads.example", "deep.bad.ads.example", "z.deep.bad.ads.example",
        "q.allow.ads.example", "ads.example", "example", "com"}) {
    queries.push_back(*DomainName::parse(adv));
  }

  size_t mismatches = 0;
  for (const auto& name : queries) {
    const auto got = store.classify(name);
    const auto want = testutil::oracle_classify(merged, store, name);
    const bool same_entry =
        got.matched.has_value() == want.matched.has_value() &&
        (!got.matched || got.matched->domain == want.matched->domain);
    if (got.cls != want.cls || got.match_depth != want.match_depth || !same_entry) {
      ++mismatches;
    }
  }

  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = mismatches == 0 && elapsed < 30.0;
  out.detail = std::to_string(queries.size()) + " names vs 10k-entry store, " +
               std::to_string(mismatches) + " oracle mismatches, " + fmt(elapsed) +
               "s (<30s)";
  return out;
}

// ---- criterion 3: end-to-end firewall ------------------------------------------

Outcome criterion3() {
  const auto start = std::chrono::steady_clock::now();
  TempDir dir("acc3");

  const auto feed_path = dir.path() / "feed.csv";
  std::ofstream(feed_path) << "domain,status,tags,source,first_seen\n"
                              "evil.example,convicted,malware,acc,\n";

  StubUpstream stub(StubUpstream::Mode::Echo);
  firewall::ServiceConfig cfg;
  for (const std::string org : {"green", "blue"}) {
    firewall::OrgBinding b;
    b.org_id = org;
    b.listen = *net::Endpoint::parse("127.0.0.1:0");
    b.group = Group::Treatment;
    cfg.bindings.push_back(b);
  }
  cfg.policy.upstream = stub.endpoint();
  cfg.policy.upstream_timeout = std::chrono::milliseconds(2000);
  cfg.feed_paths = {feed_path.string()};
  cfg.log_dir = dir.path() / "logs";
  cfg.heartbeat = std::chrono::seconds(3600);

  firewall::FirewallService service(cfg);
  service.start();
  std::map<std::string, net::Endpoint> endpoints;
  for (const auto& [org, ep] : service.listeners()) endpoints[org] = ep;

  // 10^4 queries, exactly 10% for the convicted subtree, shuffled
  const size_t total = 10'000;
  std::vector<qlog::QueryRecord> records;
  records.reserve(total);
  const int64_t base = *parse_timestamp("2018-09-17T08:00:00Z");
  for (size_t i = 0; i < total; ++i) {
    const bool hostile = i < total / 10;
    const std::string qname = hostile ? "c" + std::to_string(i) + ".evil.example"
                                      : "ok" + std::to_string(i) + ".example";
    records.push_back(testutil::make_record(base + static_cast<int64_t>(i),
                                            i % 2 ? "green" : "blue", qname,
                                            TrafficClass::Benign));
  }
  Rng shuffle_rng(33);
  shuffle_rng.shuffle(records);

  qlog::VectorReader reader(records);
  // reply budget: upstream timeout + 200ms, per the latency bound
  const auto stats = synth::replay(reader, endpoints, std::nullopt,
                                   cfg.policy.upstream_timeout +
                                       std::chrono::milliseconds(200));
  service.stop();

  // the service stamps records at receipt time, so scan around "now"
  const Date today = date_of_epoch(std::chrono::duration_cast<std::chrono::seconds>(
                                       std::chrono::system_clock::now().time_since_epoch())
                                       .count());
  size_t logged = 0;
  qlog::ScanStats scan;
  auto log_reader = qlog::open_range(cfg.log_dir, today - 2, today + 2, {}, &scan);
  qlog::QueryRecord r;
  size_t blocked_logged = 0;
  while (log_reader->next(r)) {
    ++logged;
    if (r.action == Action::Blocked) ++blocked_logged;
  }

  size_t stub_saw_blocked = 0;
  for (const auto& q : stub.qnames_seen()) {
    if (q.size() >= 12 && q.substr(q.size() - 12) == "evil.example") ++stub_saw_blocked;
  }

  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = stats.sent == total && stats.answered == total && stats.timeouts == 0 &&
             stats.blocked == total / 10 && blocked_logged == total / 10 &&
             logged == total && scan.skipped == 0 && stub_saw_blocked == 0 &&
             elapsed < 120.0;
  out.detail = "sent=" + std::to_string(stats.sent) + " answered=" +
               std::to_string(stats.answered) + " blocked=" + std::to_string(stats.blocked) +
               "/1000 logged=" + std::to_string(logged) + " stub_leaks=" +
               std::to_string(stub_saw_blocked) + " timeouts=" +
               std::to_string(stats.timeouts) + " " + fmt(elapsed) + "s (<120s)";
  return out;
}

// ---- criterion 4: figure reproduction on synthetic defaults --------------------

Outcome criterion4() {
  const auto start = std::chrono::steady_clock::now();
  const auto profiles = synth::default_profiles();
  const uint64_t seed = 1;

  std::vector<firewall::OrgBinding> bindings;
  for (const auto& p : profiles) {
    firewall::OrgBinding b;
    b.org_id = p.org_id;
    b.group = p.group;
    bindings.push_back(b);
  }

  report::ReportOptions opt;
  opt.top_n = 15;
  opt.exclude = {"ciip-my.sharepoint.com"};
  opt.track = {"counter.yadro.ru", "top-fwz1.mail.ru"};
  opt.spikes.threshold = 2.0;

  // streaming factory: regenerate rather than hold ~3M records in memory
  uint64_t generated = 0;
  const auto factory = [&]() -> std::unique_ptr<qlog::RecordReader> {
    class GenReader : public qlog::RecordReader {
     public:
      GenReader(const std::vector<synth::SynthProfile>& profiles, uint64_t seed,
                uint64_t* counter) {
        synth::generate(profiles, synth::default_from(), synth::default_to(), seed,
                        [this](const qlog::QueryRecord& r) { buffer_.push_back(r); });
        if (counter) *counter = buffer_.size();
      }
      bool next(qlog::QueryRecord& out) override {
        if (pos_ >= buffer_.size()) return false;
        out = buffer_[pos_++];
        return true;
      }

     private:
      std::vector<qlog::QueryRecord> buffer_;
      size_t pos_ = 0;
    };
    return std::make_unique<GenReader>(profiles, seed, &generated);
  };

  const auto bundle = report::build_report(factory, bindings, opt);

  TempDir dir("acc4");
  const auto files = report::emit_report(bundle, dir.path(), opt);

  std::vector<std::string> failures;

  // (a) control mean malicious proportion below treatment
  const auto& control = bundle.groups.summaries.at("control");
  const auto& treatment = bundle.groups.summaries.at("treatment");
  if (!(control.mean_malicious_proportion < treatment.mean_malicious_proportion)) {
    failures.push_back("control>=treatment");
  }

  // (b) weekday:weekend grey ratio > 2 for the bad-egg orgs
  for (const std::string org : {"green", "blue", "turquoise"}) {
    const auto it = bundle.weekday_grey.find(org);
    if (it == bundle.weekday_grey.end() || !it->second.workweek_ratio_defined ||
        it->second.workweek_ratio <= 2.0) {
      failures.push_back(org + "_grey_ratio<=2");
    }
  }

  // (c) burst domain ranks #1 and vanishes under exclusion
  if (bundle.top.empty() || bundle.top[0].qname != "ciip-my.sharepoint.com") {
    failures.push_back("burst_not_rank1");
  }
  for (const auto& t : bundle.top_excluded) {
    if (t.qname == "ciip-my.sharepoint.com") failures.push_back("exclusion_failed");
  }

  // (d) GlobalPeak r=2 flags exactly the constructed double-height day
  if (bundle.spikes.size() != 1 || bundle.spikes[0].date != synth::default_spike_date()) {
    failures.push_back("spike_count=" + std::to_string(bundle.spikes.size()));
  }

  if (files.size() < 20) failures.push_back("bundle_files=" + std::to_string(files.size()));

  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = failures.empty() && elapsed < 180.0;
  std::string joined;
  for (const auto& f : failures) joined += " " + f;
  out.detail = std::to_string(generated) + " records, " + std::to_string(files.size()) +
               " bundle files, control/treatment malicious " +
               fmt(control.mean_malicious_proportion) + "/" +
               fmt(treatment.mean_malicious_proportion) + ", spike " +
               (bundle.spikes.size() == 1 ? bundle.spikes[0].date.to_string() : "none") +
               (joined.empty() ? "" : ", FAILED:" + joined) + ", " + fmt(elapsed) +
               "s (<180s)";
  return out;
}

// ---- criterion 5: intervention calibration and power ---------------------------

struct ItsTrial {
  double p_value = 1.0;
  double effect = 0.0;
};

ItsTrial run_its_trial(const synth::SynthProfile& treated_base,
                       const synth::SynthProfile& control, Date from, Date to,
                       Date intervention, double grey_multiplier, uint64_t seed) {
  synth::SynthProfile treated = treated_base;
  if (grey_multiplier != 1.0) {
    treated.intervention = synth::InterventionEffect{intervention, grey_multiplier, 1.0};
  }

  analytics::Aggregator agg;
  synth::generate({treated, control}, from, to, seed,
                  [&](const qlog::QueryRecord& r) { agg.add(r); });
  const auto aggs = agg.finish();
  const auto series =
      analytics::proportion_series(aggs, TrafficClass::Grey, analytics::Scope::Org, {});
  const auto treated_series = analytics::filter_scope(series, treated.org_id);
  const auto control_series = analytics::filter_scope(series, control.org_id);

  its::ItsConfig cfg;
  cfg.metric = its::Metric::GreyProportion;
  cfg.pre_window = 90;
  cfg.post_window = 60;
  cfg.n_permutations = 1000;
  cfg.use_control_covariate = true;
  cfg.weekday_dummies = true;
  cfg.rng_seed = mix_seed(seed, "its");

  const auto est = its::estimate_effect(treated_series, control_series, intervention, cfg);
  return {est.p_value, est.effect};
}

Outcome criterion5() {
  const auto start = std::chrono::steady_clock::now();
  const auto profiles = synth::default_profiles();
  synth::SynthProfile treated, control;
  for (const auto& p : profiles) {
    if (p.org_id == "blue") treated = p;
    if (p.org_id == "red") control = p;
  }
  // placebo inference needs a pre-period much longer than pre+post for its
  // null distribution to have enough effectively-independent windows, so
  // the calibration run extends the default pair's history back to 2016
  const Date from = Date::from_ymd(2016, 1, 4);
  const Date to = Date::from_ymd(2018, 9, 29);
  const Date intervention = Date::from_ymd(2018, 8, 1);

  // null calibration: false-positive rate at alpha=0.05 over 200 seeds
  size_t null_rejections = 0;
  const size_t null_seeds = 200;
  for (size_t s = 0; s < null_seeds; ++s) {
    const auto trial =
        run_its_trial(treated, control, from, to, intervention, 1.0, 1000 + s);
    if (trial.p_value < 0.05) ++null_rejections;
  }
  const double fpr = static_cast<double>(null_rejections) / null_seeds;

  // power: 50% grey reduction detected over 100 seeds
  size_t detections = 0;
  double effect_sum = 0.0;
  const size_t power_seeds = 100;
  for (size_t s = 0; s < power_seeds; ++s) {
    const auto trial =
        run_its_trial(treated, control, from, to, intervention, 0.5, 7000 + s);
    if (trial.p_value < 0.05) ++detections;
    effect_sum += trial.effect;
  }
  const double power = static_cast<double>(detections) / power_seeds;
  const double mean_effect = effect_sum / power_seeds;
  const double truth = its::expected_proportion(treated, its::Metric::GreyProportion, 0.5) -
                       its::expected_proportion(treated, its::Metric::GreyProportion, 1.0);
  const double bias_rel = std::abs(mean_effect - truth) / std::abs(truth);

  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = fpr >= 0.02 && fpr <= 0.08 && power >= 0.80 && bias_rel <= 0.20 &&
             elapsed < 900.0;
  out.detail = "fpr=" + fmt(fpr) + " (in [0.02,0.08]), power=" + fmt(power) +
               " (>=0.80), mean_effect=" + fmt(mean_effect) + " truth=" + fmt(truth) +
               " bias=" + fmt(bias_rel * 100) + "% (<=20%), " + fmt(elapsed) + "s (<900s)";
  return out;
}

// ---- criterion 6: conservation, exact -------------------------------------------

Outcome criterion6() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(0xC0);
  const auto records = testutil::random_records(rng, 10'000);

  qlog::VectorReader reader(records);
  const auto aggs = analytics::daily_aggregate(reader);

  size_t violations = 0;

  // per-day class counts sum to totals, and match a recount
  std::map<std::pair<std::string, int32_t>, uint64_t> recount;
  for (const auto& r : records) ++recount[{r.org_id, r.date().days()}];
  uint64_t agg_total = 0;
  for (const auto& a : aggs) {
    if (a.malicious + a.grey + a.benign != a.total) ++violations;
    if (recount.at({a.org_id, a.date.days()}) != a.total) ++violations;
    agg_total += a.total;
  }
  if (agg_total != records.size()) ++violations;

  // group series are exact pools of member series
  std::vector<firewall::OrgBinding> bindings;
  for (const std::string org : {"red", "yellow"}) {
    firewall::OrgBinding b;
    b.org_id = org;
    b.group = Group::Control;
    bindings.push_back(b);
  }
  for (const std::string org : {"green", "turquoise", "blue", "pink"}) {
    firewall::OrgBinding b;
    b.org_id = org;
    b.group = Group::Treatment;
    bindings.push_back(b);
  }
  for (const auto cls : {TrafficClass::Malicious, TrafficClass::Grey}) {
    const auto by_group = analytics::proportion_series(aggs, cls, analytics::Scope::Group,
                                                       bindings);
    std::map<std::pair<std::string, int32_t>, std::pair<uint64_t, uint64_t>> pool;
    for (const auto& a : aggs) {
      const bool is_control = a.org_id == "red" || a.org_id == "yellow";
      auto& p = pool[{is_control ? "control" : "treatment", a.date.days()}];
      p.first += cls == TrafficClass::Malicious ? a.malicious : a.grey;
      p.second += a.total;
    }
    for (const auto& point : by_group) {
      const auto it = pool.find({point.scope, point.date.days()});
      const bool have = it != pool.end() && it->second.second > 0;
      if (point.defined != have) {
        ++violations;
      } else if (have &&
                 point.value != static_cast<double>(it->second.first) /
                                    static_cast<double>(it->second.second)) {
        ++violations;
      }
    }
  }

  // org-split domain series sum to the unsplit series
  const std::set<std::string> qnames = {"www.google.com", "counter.yadro.ru",
                                        "evil.example"};
  qlog::VectorReader r1(records), r2(records);
  const auto flat = analytics::domain_series(r1, qnames, false);
  const auto split = analytics::domain_series(r2, qnames, true);
  for (const auto& f : flat) {
    for (size_t i = 0; i < f.days.size(); ++i) {
      uint64_t sum = 0;
      for (const auto& s : split) {
        if (s.qname == f.qname) sum += s.days[i].count;
      }
      if (sum != f.days[i].count) ++violations;
    }
  }

  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = violations == 0;
  out.detail = "10k records, " + std::to_string(violations) +
               " conservation violations (exact, zero tolerance), " + fmt(elapsed) + "s";
  return out;
}

// ---- criterion 7: determinism through the CLI -----------------------------------

std::string run_cli(const std::string& cli, const std::string& args,
                    const std::filesystem::path& stdout_path) {
  const std::string cmd = cli + " " + args + " > " + stdout_path.string() + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  if (rc != 0) return "exit=" + std::to_string(rc) + " for: " + args;
  return "";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion7() {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;

  const char* cli_env = std::getenv("DNSWARD_CLI");
  if (!cli_env) {
    out.detail = "DNSWARD_CLI not set";
    return out;
  }
  const std::string cli = cli_env;
  TempDir dir("acc7");

  // synth generate --seed S twice: byte-identical
  const std::string gen_args =
      "synth generate --defaults --seed 7 --from 2018-04-02 --to 2018-04-30";
  std::string err = run_cli(cli, gen_args, dir.path() / "gen1.jsonl");
  if (err.empty()) err = run_cli(cli, gen_args, dir.path() / "gen2.jsonl");
  if (!err.empty()) {
    out.detail = err;
    return out;
  }
  const auto gen1 = slurp(dir.path() / "gen1.jsonl");
  const auto gen2 = slurp(dir.path() / "gen2.jsonl");
  const bool gen_identical = !gen1.empty() && gen1 == gen2;

  // a different seed actually changes the bytes
  err = run_cli(cli,
                "synth generate --defaults --seed 8 --from 2018-04-02 --to 2018-04-30",
                dir.path() / "gen3.jsonl");
  const bool seed_matters = err.empty() && slurp(dir.path() / "gen3.jsonl") != gen1;

  // its --seed S twice over the same ingested logs: identical estimates
  err = run_cli(cli,
                "synth generate --defaults --seed 7 --out " +
                    (dir.path() / "run.jsonl").string(),
                dir.path() / "gen_out.txt");
  if (!err.empty()) {
    out.detail = err;
    return out;
  }
  err = run_cli(cli,
                "ingest --input " + (dir.path() / "run.jsonl").string() + " --log-dir " +
                    (dir.path() / "logs").string(),
                dir.path() / "ingest.txt");
  if (!err.empty()) {
    out.detail = err;
    return out;
  }
  // windows sized to the eight-month default range so placebos fit
  const std::string its_args = "its --log-dir " + (dir.path() / "logs").string() +
                               " --org blue --date 2018-08-01 --metric grey --pre 60 "
                               "--post 30 --permutations 400 --seed 11 --out ";
  err = run_cli(cli, its_args + (dir.path() / "e1.csv").string(),
                dir.path() / "its1.txt");
  if (err.empty()) {
    err = run_cli(cli, its_args + (dir.path() / "e2.csv").string(),
                  dir.path() / "its2.txt");
  }
  if (!err.empty()) {
    out.detail = err;
    return out;
  }
  const bool its_identical = slurp(dir.path() / "e1.csv") == slurp(dir.path() / "e2.csv") &&
                             slurp(dir.path() / "its1.txt") == slurp(dir.path() / "its2.txt") &&
                             !slurp(dir.path() / "e1.csv").empty();

  const double elapsed = seconds_since(start);
  out.pass = gen_identical && seed_matters && its_identical;
  out.detail = std::string("generate twice: ") + (gen_identical ? "identical" : "DIFFER") +
               ", seed sensitivity: " + (seed_matters ? "ok" : "MISSING") +
               ", its twice: " + (its_identical ? "identical" : "DIFFER") + ", " +
               fmt(elapsed) + "s";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  int which = 0;  // 0 = all
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--criterion" && i + 1 < argc) {
      which = std::atoi(argv[i + 1]);
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"wire-codec-fuzz-and-roundtrip", criterion1},
      {"classifier-oracle-equivalence", criterion2},
      {"end-to-end-firewall", criterion3},
      {"figure-reproduction-synthetic-defaults", criterion4},
      {"intervention-calibration-and-power", criterion5},
      {"conservation-exact", criterion6},
      {"determinism-cli", criterion7},
  };

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    if (which != 0 && which != static_cast<int>(i + 1)) continue;
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s  criterion-%zu %s: %s\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  return failures;
}
