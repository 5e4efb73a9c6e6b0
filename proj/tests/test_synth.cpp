#include <doctest.h>

#include <sstream>

#include "dnsward/analytics.hpp"
#include "dnsward/synth.hpp"
#include "helpers.hpp"

using namespace dnsward;
using namespace dnsward::synth;

namespace {

SynthProfile small_profile(const std::string& org = "t") {
  SynthProfile p;
  p.org_id = org;
  p.n_users = 8;
  p.per_user_daily_rate = 30;
  p.weekday_amplitude = 5.0;
  p.benign_pool = {{"b1.example", 50.0}, {"b2.example", 30.0}, {"b3.example", 20.0}};
  p.grey_pool = {{"g1.example", 4.0}, {"g2.example", 2.0}};
  p.malicious_pool = {{"m1.example", 1.0}};
  return p;
}

}  // namespace

TEST_CASE("same profiles and seed give byte-identical output") {
  const auto profiles = std::vector<SynthProfile>{small_profile("a"), small_profile("b")};
  const Date from = Date::from_ymd(2018, 4, 2), to = Date::from_ymd(2018, 4, 29);
  std::ostringstream run1, run2;
  generate(profiles, from, to, 99,
           [&](const qlog::QueryRecord& r) { run1 << qlog::to_jsonl(r) << "\n"; });
  generate(profiles, from, to, 99,
           [&](const qlog::QueryRecord& r) { run2 << qlog::to_jsonl(r) << "\n"; });
  CHECK(run1.str() == run2.str());
  CHECK_FALSE(run1.str().empty());

  std::ostringstream other_seed;
  generate(profiles, from, to, 100,
           [&](const qlog::QueryRecord& r) { other_seed << qlog::to_jsonl(r) << "\n"; });
  CHECK(run1.str() != other_seed.str());
}

TEST_CASE("records arrive chronologically ordered with business-hour timestamps") {
  const auto records = generate_records({small_profile()}, Date::from_ymd(2018, 4, 2),
                                        Date::from_ymd(2018, 4, 15), 5);
  REQUIRE_FALSE(records.empty());
  for (size_t i = 1; i < records.size(); ++i) {
    CHECK(records[i - 1].ts <= records[i].ts);
  }
  for (const auto& r : records) {
    const int64_t sec_of_day = r.ts - to_epoch_seconds(r.date());
    CHECK(sec_of_day >= 8 * 3600);
    CHECK(sec_of_day < 18 * 3600);
  }
}

TEST_CASE("weekday amplitude 5 is measured within 20% over 8 weeks") {
  // 8 full weeks starting on a Monday
  const auto records = generate_records({small_profile()}, Date::from_ymd(2018, 4, 2),
                                        Date::from_ymd(2018, 5, 27), 21);
  qlog::VectorReader reader(records);
  const auto aggs = analytics::daily_aggregate(reader);
  const auto profile =
      analytics::weekday_profile(aggs, analytics::CountMetric::Total, analytics::kScopeAll);
  REQUIRE(profile.workweek_ratio_defined);
  CHECK(profile.workweek_ratio > 4.0);
  CHECK(profile.workweek_ratio < 6.0);
}

TEST_CASE("generated class labels match classify() against the bundled store") {
  const auto profiles = default_profiles();
  const auto store = bundled_store(profiles);
  const auto records = generate_records(profiles, Date::from_ymd(2018, 4, 2),
                                        Date::from_ymd(2018, 4, 8), 3);
  REQUIRE_FALSE(records.empty());
  for (const auto& r : records) {
    const auto name = DomainName::parse(r.qname);
    REQUIRE(name.has_value());
    const auto verdict = store.classify(*name);
    CAPTURE(r.qname);
    CHECK(verdict.cls == r.cls);
    if (r.cls != TrafficClass::Benign) {
      REQUIRE(r.matched_domain.has_value());
      CHECK(verdict.matched->domain.to_string() == *r.matched_domain);
    }
  }
}

TEST_CASE("post-intervention grey emission tracks the multiplier within 15%") {
  SynthProfile p = small_profile();
  p.weekday_amplitude = 1.0;  // flat volume isolates the mix shift
  p.intervention = InterventionEffect{Date::from_ymd(2018, 7, 1), 0.5, 1.0};
  const auto records = generate_records({p}, Date::from_ymd(2018, 4, 1),
                                        Date::from_ymd(2018, 9, 30), 17);
  uint64_t pre_grey = 0, pre_total = 0, post_grey = 0, post_total = 0;
  for (const auto& r : records) {
    const bool post = r.date() >= Date::from_ymd(2018, 7, 1);
    (post ? post_total : pre_total) += 1;
    if (r.cls == TrafficClass::Grey) (post ? post_grey : pre_grey) += 1;
  }
  const double pre_rate = static_cast<double>(pre_grey) / static_cast<double>(pre_total);
  const double post_rate = static_cast<double>(post_grey) / static_cast<double>(post_total);
  CHECK(std::abs(post_rate - 0.5 * pre_rate) / (0.5 * pre_rate) < 0.15);
}

TEST_CASE("bursts inject the configured volume on scheduled days") {
  SynthProfile p = small_profile();
  p.bursts = {{"burst.example", 3, 500, 500, Date::from_ymd(2018, 4, 10)}};
  const auto records = generate_records({p}, Date::from_ymd(2018, 4, 2),
                                        Date::from_ymd(2018, 4, 20), 9);
  std::map<int32_t, uint64_t> burst_by_day;
  for (const auto& r : records) {
    if (r.qname == "burst.example") ++burst_by_day[r.date().days()];
  }
  REQUIRE(burst_by_day.size() == 3);
  for (const auto& [day, count] : burst_by_day) {
    CHECK(Date(day) >= Date::from_ymd(2018, 4, 10));
    CHECK(Date(day) <= Date::from_ymd(2018, 4, 12));
    CHECK(count == 500);
  }
}

TEST_CASE("default profiles reproduce the qualitative findings on a fixed seed") {
  const auto profiles = default_profiles();
  // five months keeps this fast while spanning the August/September episodes
  const auto records =
      generate_records(profiles, default_from(), Date::from_ymd(2018, 9, 30), 1);
  qlog::VectorReader reader(records);
  const auto aggs = analytics::daily_aggregate(reader);

  std::vector<firewall::OrgBinding> bindings;
  for (const auto& p : profiles) {
    firewall::OrgBinding b;
    b.org_id = p.org_id;
    b.group = p.group;
    bindings.push_back(b);
  }

  SUBCASE("control mean malicious proportion below treatment") {
    const auto report = analytics::group_report(aggs, bindings);
    CHECK(report.summaries.at("control").mean_malicious_proportion <
          report.summaries.at("treatment").mean_malicious_proportion);
    CHECK(report.summaries.at("control").mean_grey_proportion <
          report.summaries.at("treatment").mean_grey_proportion);
    // the control group sees many zero-malicious days
    CHECK(report.summaries.at("control").days_zero_malicious >
          report.summaries.at("treatment").days_zero_malicious);
  }

  SUBCASE("green's grey proportion exceeds yellow's") {
    uint64_t green_grey = 0, green_total = 0, yellow_grey = 0, yellow_total = 0;
    for (const auto& a : aggs) {
      if (a.org_id == "green") {
        green_grey += a.grey;
        green_total += a.total;
      } else if (a.org_id == "yellow") {
        yellow_grey += a.grey;
        yellow_total += a.total;
      }
    }
    CHECK(static_cast<double>(green_grey) / green_total >
          static_cast<double>(yellow_grey) / yellow_total);
  }

  SUBCASE("the constructed 2018-09-17 day doubles every other day's malicious count") {
    const auto findings = analytics::detect_spikes(
        aggs, analytics::SpikeMetric::MaliciousCount, analytics::kScopeAll,
        {.threshold = 2.0});
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].date == default_spike_date());
    CHECK(findings[0].ratio >= 2.0);
  }
}

TEST_CASE("default full run lands at the documented order of magnitude") {
  // volume check only; the full figure-reproduction run lives in acceptance
  uint64_t count = 0;
  generate(default_profiles(), default_from(), default_to(), 1,
           [&](const qlog::QueryRecord&) { ++count; });
  CHECK(count > 500000);
  CHECK(count < 5000000);
}

TEST_CASE("profile config round-trip") {
  const auto cfg = KvConfig::parse_string(
      "range = 2018-04-01..2018-04-30\n"
      "profile.demo.group = treatment\n"
      "profile.demo.users = 12\n"
      "profile.demo.rate = 25\n"
      "profile.demo.amplitude = 3\n"
      "profile.demo.benign = [a.example*10, b.example*5]\n"
      "profile.demo.grey = [g.example*1.5]\n"
      "profile.demo.malicious = [m.example*0.2]\n"
      "profile.demo.bad_egg.0 = user=2 grey=20 malicious=10\n"
      "profile.demo.burst.0 = qname=blast.example days=2 volume=100-200 start=2018-04-10\n"
      "profile.demo.intervention = date=2018-04-20 grey=0.5\n");
  const auto profiles = profiles_from_config(cfg);
  REQUIRE(profiles.size() == 1);
  const auto& p = profiles[0];
  CHECK(p.org_id == "demo");
  CHECK(p.n_users == 12);
  CHECK(p.per_user_daily_rate == 25);
  CHECK(p.benign_pool.size() == 2);
  CHECK(p.benign_pool[0].weight == 10);
  REQUIRE(p.bad_eggs.size() == 1);
  CHECK(p.bad_eggs[0].user_index == 2);
  CHECK(p.bad_eggs[0].grey_multiplier == 20);
  REQUIRE(p.bursts.size() == 1);
  CHECK(p.bursts[0].qname == "blast.example");
  CHECK(p.bursts[0].min_per_day == 100);
  CHECK(p.bursts[0].max_per_day == 200);
  REQUIRE(p.intervention.has_value());
  CHECK(p.intervention->grey_multiplier == 0.5);

  const auto range = range_from_config(cfg);
  REQUIRE(range.has_value());
  CHECK(range->from == Date::from_ymd(2018, 4, 1));

  // generation from the parsed profile works
  const auto records = generate_records(profiles, range->from, range->to, 4);
  CHECK_FALSE(records.empty());
}

TEST_CASE("bundled feed matches the pools") {
  const auto profiles = default_profiles();
  const auto feed = bundled_feed(profiles);
  std::set<std::string> names;
  for (const auto& e : feed) names.insert(e.domain.to_string());
  CHECK(names.count("counter.yadro.ru"));
  CHECK(names.count("www.odnoklassniki.ru"));
  for (const auto& e : feed) {
    if (e.status == IntelStatus::Convicted) {
      CHECK(e.tags.count("malware"));
    } else {
      CHECK(e.status == IntelStatus::Blacklisted);
      CHECK(e.tags.count("adware"));
    }
  }

  testutil::TempDir dir("feed");
  const auto path = (dir.path() / "synthetic.csv").string();
  write_bundled_feed(profiles, path);
  const auto loaded = intel::load_feed(path, "synthetic");
  CHECK(loaded.entries.size() == feed.size());
  CHECK(loaded.warnings.empty());
}

TEST_CASE("replay with an empty stream does nothing") {
  qlog::VectorReader reader(std::vector<qlog::QueryRecord>{});
  const auto stats = replay(reader, {}, std::nullopt, std::chrono::milliseconds(100));
  CHECK(stats.sent == 0);
  CHECK(stats.answered == 0);
  CHECK(stats.blocked == 0);
}

TEST_CASE("replay without an endpoint for an org fails") {
  qlog::VectorReader reader({testutil::make_record(to_epoch_seconds(Date::from_ymd(2018, 5, 1)),
                                                   "ghost", "x.example",
                                                   TrafficClass::Benign)});
  CHECK_THROWS_WITH_AS(replay(reader, {}, std::nullopt, std::chrono::milliseconds(100)),
                       doctest::Contains("UNREACHABLE"), Error);
}
