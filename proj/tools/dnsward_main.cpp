// dnsward: DNS firewall and hygiene-analytics toolkit.
//
// One binary, subcommand style, so a full analysis on synthetic data is a
// short shell pipeline (see docs/cli.md). Machine-readable output goes to
// stdout, diagnostics to stderr; exit codes: 0 ok, 1 runtime error with a
// "CODE: message" line, 2 usage error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dnsward/analytics.hpp"
#include "dnsward/csv.hpp"
#include "dnsward/firewall.hpp"
#include "dnsward/intel.hpp"
#include "dnsward/intervention.hpp"
#include "dnsward/kvconfig.hpp"
#include "dnsward/query_log.hpp"
#include "dnsward/report.hpp"
#include "dnsward/synth.hpp"
#include "dnsward/types.hpp"

namespace {

using namespace dnsward;

// ---- shared option bundles --------------------------------------------------

struct LogRangeOpts {
  std::string log_dir;
  std::string from, to;

  void attach(CLI::App* cmd) {
    cmd->add_option("--log-dir", log_dir, "query log directory")->required();
    cmd->add_option("--from", from, "range start YYYY-MM-DD (default: first log file)");
    cmd->add_option("--to", to, "range end YYYY-MM-DD (default: last log file)");
  }

  // min/max dates present as rotated files when flags are absent
  std::pair<Date, Date> resolve() const {
    std::optional<Date> lo, hi;
    if (!from.empty()) {
      const auto d = Date::parse(from);
      if (!d) fail("CONFIG_INVALID", "bad --from date: " + from);
      lo = *d;
    }
    if (!to.empty()) {
      const auto d = Date::parse(to);
      if (!d) fail("CONFIG_INVALID", "bad --to date: " + to);
      hi = *d;
    }
    if (lo && hi) return {*lo, *hi};
    if (!std::filesystem::is_directory(log_dir)) {
      fail("MISSING_DIR", "log directory not found: " + log_dir);
    }
    std::optional<Date> min_seen, max_seen;
    for (const auto& org : std::filesystem::directory_iterator(log_dir)) {
      if (!org.is_directory()) continue;
      for (const auto& f : std::filesystem::directory_iterator(org.path())) {
        const auto name = f.path().filename().string();
        if (name.size() != 16 || name.substr(10) != ".jsonl") continue;
        const auto d = Date::parse(name.substr(0, 10));
        if (!d) continue;
        if (!min_seen || *d < *min_seen) min_seen = *d;
        if (!max_seen || *d > *max_seen) max_seen = *d;
      }
    }
    if (!min_seen) fail("MISSING_DIR", "no log files under " + log_dir);
    return {lo.value_or(*min_seen), hi.value_or(*max_seen)};
  }
};

struct FeedOpts {
  std::vector<std::string> feeds;

  void attach(CLI::App* cmd, bool required = true) {
    auto* opt = cmd->add_option("--feeds", feeds, "threat-intel feed CSV (repeatable)");
    if (required) opt->required();
  }

  intel::IntelStore load() const {
    std::vector<std::vector<intel::ThreatEntry>> lists;
    for (const auto& path : feeds) {
      auto result = intel::load_feed(path, std::filesystem::path(path).stem().string());
      for (const auto& w : result.warnings) std::cerr << "feed warning: " << w << "\n";
      lists.push_back(std::move(result.entries));
    }
    return intel::IntelStore::merge(lists);
  }
};

struct GroupOpts {
  std::vector<std::string> assignments;  // org=control / org=treatment

  void attach(CLI::App* cmd) {
    cmd->add_option("--groups", assignments,
                    "org=control|treatment (repeatable; defaults cover the "
                    "bundled six-org preset)");
  }

  std::vector<firewall::OrgBinding> resolve(const std::vector<std::string>& orgs) const {
    std::map<std::string, Group> groups;
    for (const auto& a : assignments) {
      const size_t eq = a.find('=');
      if (eq == std::string::npos) fail("CONFIG_INVALID", "--groups expects org=group: " + a);
      const auto g = parse_group(a.substr(eq + 1));
      if (!g) fail("CONFIG_INVALID", "bad group in --groups: " + a);
      groups[a.substr(0, eq)] = *g;
    }
    if (groups.empty()) {
      // fall back to the synthetic preset's assignment when it covers the data
      for (const auto& p : synth::default_profiles()) groups[p.org_id] = p.group;
    }
    std::vector<firewall::OrgBinding> bindings;
    for (const auto& org : orgs) {
      const auto it = groups.find(org);
      if (it == groups.end()) {
        fail("CONFIG_INVALID", "no group assignment for org '" + org + "' (use --groups)");
      }
      firewall::OrgBinding b;
      b.org_id = org;
      b.group = it->second;
      bindings.push_back(std::move(b));
    }
    return bindings;
  }
};

std::vector<std::string> orgs_in(const std::vector<analytics::DailyAggregate>& aggs) {
  std::set<std::string> orgs;
  for (const auto& a : aggs) orgs.insert(a.org_id);
  return {orgs.begin(), orgs.end()};
}

std::vector<analytics::DailyAggregate> aggregate_range(const LogRangeOpts& range) {
  const auto [from, to] = range.resolve();
  auto reader = qlog::open_range(range.log_dir, from, to);
  return analytics::daily_aggregate(*reader);
}

// ---- subcommand bodies --------------------------------------------------------

int cmd_serve(const std::string& config_path) {
  const auto cfg = KvConfig::parse_file(config_path);
  return firewall::serve(firewall::service_config_from(cfg));
}

int cmd_feed_stats(const FeedOpts& feeds) {
  const auto store = feeds.load();
  const auto& stats = store.stats();
  std::cout << "entries=" << stats.entries << "\n";
  for (const auto& [status, count] : stats.by_status) {
    std::cout << "status." << to_string(status) << "=" << count << "\n";
  }
  for (const auto& [tag, count] : stats.by_tag) {
    std::cout << "tag." << tag << "=" << count << "\n";
  }
  return 0;
}

int cmd_classify(const std::string& name, const FeedOpts& feeds) {
  const auto domain = DomainName::parse(name);
  if (!domain) fail("CONFIG_INVALID", "not a valid domain name: " + name);
  const auto store = feeds.load();
  const auto verdict = store.classify(*domain);

  std::string tags = "-";
  if (verdict.matched && !verdict.matched->tags.empty()) {
    tags.clear();
    for (const auto& t : verdict.matched->tags) {
      if (!tags.empty()) tags += ';';
      tags += t;
    }
  }
  std::cout << to_string(verdict.cls) << " " << tags << " depth=" << verdict.match_depth
            << " matched="
            << (verdict.matched ? verdict.matched->domain.to_string() : "-") << "\n";
  return 0;
}

struct IngestOpts {
  std::string csv_path;
  bool from_stdin = false;
  std::string input_jsonl;
  std::string log_dir;
  FeedOpts feeds;
  std::string map_ts = "timestamp", map_org = "org", map_qname = "qname";
  std::string map_qtype, map_class, map_action, map_rcode;
};

int cmd_ingest(const IngestOpts& opt) {
  std::optional<intel::IntelStore> store;
  if (!opt.feeds.feeds.empty()) store = opt.feeds.load();

  qlog::ScanStats stats;
  std::unique_ptr<qlog::RecordReader> reader;
  std::ifstream file_in;
  if (opt.from_stdin) {
    reader = qlog::open_jsonl_stream(std::cin, &stats);
  } else if (!opt.input_jsonl.empty()) {
    file_in.open(opt.input_jsonl);
    if (!file_in) fail("FILE_UNREADABLE", "cannot open " + opt.input_jsonl);
    reader = qlog::open_jsonl_stream(file_in, &stats);
  } else if (!opt.csv_path.empty()) {
    qlog::CsvMapping mapping;
    mapping.timestamp = opt.map_ts;
    mapping.org = opt.map_org;
    mapping.qname = opt.map_qname;
    if (!opt.map_qtype.empty()) mapping.qtype = opt.map_qtype;
    if (!opt.map_class.empty()) mapping.cls = opt.map_class;
    if (!opt.map_action.empty()) mapping.action = opt.map_action;
    if (!opt.map_rcode.empty()) mapping.rcode = opt.map_rcode;
    reader = qlog::open_import(opt.csv_path, mapping, store ? &*store : nullptr, &stats);
  } else {
    fail("CONFIG_INVALID", "ingest needs --csv, --input, or --stdin");
  }

  qlog::LogWriter writer(opt.log_dir);
  qlog::QueryRecord r;
  uint64_t written = 0;
  while (reader->next(r)) {
    writer.append(r);
    ++written;
  }
  writer.close();
  std::cout << "ingested=" << written << " skipped=" << stats.skipped << "\n";
  return 0;
}

struct ReportOpts {
  LogRangeOpts range;
  GroupOpts groups;
  std::string out_dir = "report";
  report::ReportOptions options;
  std::vector<std::string> exclude, track;
  bool no_svg = false, no_csv = false;
};

int cmd_report(ReportOpts& opt) {
  const auto [from, to] = opt.range.resolve();
  opt.options.exclude = opt.exclude;
  opt.options.track = opt.track;
  opt.options.svg = !opt.no_svg;
  opt.options.csv = !opt.no_csv;

  // bindings need the org list; one cheap pass over the aggregates first
  auto aggs = aggregate_range(opt.range);
  const auto bindings = opt.groups.resolve(orgs_in(aggs));

  const auto factory = [&]() { return qlog::open_range(opt.range.log_dir, from, to); };
  const auto bundle = report::build_report(factory, bindings, opt.options);
  const auto written = report::emit_report(bundle, opt.out_dir, opt.options);
  for (const auto& p : written) std::cout << p.string() << "\n";
  std::cerr << "report: " << written.size() << " files in " << opt.out_dir << "\n";
  return 0;
}

int cmd_top(const LogRangeOpts& range, size_t n, const std::vector<std::string>& exclude) {
  const auto [from, to] = range.resolve();
  auto reader = qlog::open_range(range.log_dir, from, to);
  const std::set<std::string> excl(exclude.begin(), exclude.end());
  const auto ranked = analytics::top_domains(*reader, n, excl);
  std::cout << "rank,qname,count\n";
  for (size_t i = 0; i < ranked.size(); ++i) {
    std::cout << i + 1 << "," << csv_escape(ranked[i].qname) << "," << ranked[i].count
              << "\n";
  }
  return 0;
}

struct SpikeOpts {
  LogRangeOpts range;
  std::string metric = "malicious_count";
  std::string scope = analytics::kScopeAll;
  std::string mode = "global-peak";
  analytics::SpikeOptions options;
};

int cmd_spikes(const SpikeOpts& opt) {
  analytics::SpikeMetric metric;
  if (opt.metric == "malicious_count") metric = analytics::SpikeMetric::MaliciousCount;
  else if (opt.metric == "grey_count") metric = analytics::SpikeMetric::GreyCount;
  else if (opt.metric == "malicious_proportion")
    metric = analytics::SpikeMetric::MaliciousProportion;
  else fail("CONFIG_INVALID", "bad --metric: " + opt.metric);

  analytics::SpikeOptions options = opt.options;
  if (opt.mode == "global-peak") options.mode = analytics::SpikeMode::GlobalPeak;
  else if (opt.mode == "rolling-median") options.mode = analytics::SpikeMode::RollingMedian;
  else fail("CONFIG_INVALID", "bad --mode: " + opt.mode);

  const auto aggs = aggregate_range(opt.range);
  const auto findings = analytics::detect_spikes(aggs, metric, opt.scope, options);
  std::cout << "date,scope,metric,value,baseline,ratio\n";
  for (const auto& f : findings) {
    std::cout << f.date.to_string() << "," << f.scope << "," << to_string(f.metric) << ","
              << f.value << "," << f.baseline << "," << f.ratio << "\n";
  }
  return 0;
}

int cmd_weekly(const LogRangeOpts& range, const std::string& metric_name,
               const std::string& scope) {
  analytics::CountMetric metric;
  if (metric_name == "total") metric = analytics::CountMetric::Total;
  else if (metric_name == "grey") metric = analytics::CountMetric::Grey;
  else if (metric_name == "malicious") metric = analytics::CountMetric::Malicious;
  else if (metric_name == "benign") metric = analytics::CountMetric::Benign;
  else fail("CONFIG_INVALID", "bad --metric: " + metric_name);

  const auto aggs = aggregate_range(range);
  const auto profile = analytics::weekday_profile(aggs, metric, scope);
  static const char* days[7] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};
  std::cout << "weekday,mean_count,samples\n";
  for (int i = 0; i < 7; ++i) {
    std::cout << days[i] << "," << profile.mean_counts[i] << "," << profile.day_samples[i]
              << "\n";
  }
  if (profile.workweek_ratio_defined) {
    std::cout << "workweek_ratio," << profile.workweek_ratio << ",\n";
  } else {
    std::cout << "workweek_ratio,undefined,\n";
  }
  return 0;
}

int cmd_compare(const LogRangeOpts& range, const GroupOpts& groups) {
  const auto aggs = aggregate_range(range);
  const auto bindings = groups.resolve(orgs_in(aggs));
  const auto report = analytics::group_report(aggs, bindings);
  std::cout << "group,mean_malicious_proportion,mean_grey_proportion,days_zero_malicious,"
               "days_observed,total_requests\n";
  for (const auto& [group, s] : report.summaries) {
    std::cout << group << "," << s.mean_malicious_proportion << ","
              << s.mean_grey_proportion << "," << s.days_zero_malicious << ","
              << s.days_observed << "," << s.total_requests << "\n";
  }
  return 0;
}

struct ItsOpts {
  LogRangeOpts range;
  GroupOpts groups;
  std::string org;
  std::string date;
  std::string metric = "grey";
  its::ItsConfig cfg;
  bool no_control = false, no_weekday = false;
  std::string out = "effect.csv";
};

int cmd_its(ItsOpts& opt) {
  const auto date = Date::parse(opt.date);
  if (!date) fail("CONFIG_INVALID", "bad --date: " + opt.date);
  const auto metric = its::parse_metric(opt.metric);
  if (!metric) fail("CONFIG_INVALID", "bad --metric: " + opt.metric);
  opt.cfg.metric = *metric;
  opt.cfg.use_control_covariate = !opt.no_control;
  opt.cfg.weekday_dummies = !opt.no_weekday;

  const auto aggs = aggregate_range(opt.range);
  const auto bindings = opt.groups.resolve(orgs_in(aggs));

  const TrafficClass cls = *metric == its::Metric::GreyProportion ? TrafficClass::Grey
                                                                  : TrafficClass::Malicious;
  const auto by_org = analytics::proportion_series(aggs, cls, analytics::Scope::Org, bindings);
  const auto treated = analytics::filter_scope(by_org, opt.org);
  if (treated.empty()) fail("INSUFFICIENT_DATA", "no data for org " + opt.org);
  const auto by_group =
      analytics::proportion_series(aggs, cls, analytics::Scope::Group, bindings);
  const auto control = analytics::filter_scope(by_group, "control");

  const auto est = its::estimate_effect(treated, control, *date, opt.cfg);
  for (const auto& w : est.warnings) std::cerr << "warning: " << w << "\n";

  std::cout << "effect=" << est.effect << " relative=" << est.relative_effect << " ci=["
            << est.ci_low << "," << est.ci_high << "] p=" << est.p_value
            << " pre_days=" << est.n_defined_days_pre
            << " post_days=" << est.n_defined_days_post
            << " placebos=" << est.n_placebos
            << (est.degenerate_fit ? " degenerate_fit=1" : "")
            << " method=ols-its+placebo\n";

  std::ofstream out(opt.out);
  if (!out) fail("IO_ERROR", "cannot write " + opt.out);
  out << "org,metric,intervention_date,effect,relative_effect,ci_low,ci_high,p_value,"
         "n_pre,n_post,n_placebos,degenerate_fit,method\n";
  out << opt.org << "," << to_string(*metric) << "," << date->to_string() << ","
      << est.effect << "," << est.relative_effect << "," << est.ci_low << ","
      << est.ci_high << "," << est.p_value << "," << est.n_defined_days_pre << ","
      << est.n_defined_days_post << "," << est.n_placebos << ","
      << (est.degenerate_fit ? 1 : 0) << ",ols-its+placebo\n";
  return 0;
}

struct PowerOpts {
  std::string profile_path;
  bool defaults = false;
  std::string treated = "blue", control = "red";
  std::string date = "2018-08-01";
  std::string from, to;
  std::vector<double> effects{1.0, 0.7, 0.5};
  size_t trials = 50;
  uint64_t seed = 1;
  std::string metric = "grey";
  its::ItsConfig cfg;
  std::string out = "power.csv";
};

int cmd_power(PowerOpts& opt) {
  const auto metric = its::parse_metric(opt.metric);
  if (!metric) fail("CONFIG_INVALID", "bad --metric: " + opt.metric);
  opt.cfg.metric = *metric;

  std::vector<synth::SynthProfile> profiles;
  Date from = synth::default_from(), to = synth::default_to();
  if (opt.defaults || opt.profile_path.empty()) {
    profiles = synth::default_profiles();
  } else {
    const auto cfg = KvConfig::parse_file(opt.profile_path);
    profiles = synth::profiles_from_config(cfg);
    if (const auto range = synth::range_from_config(cfg)) {
      from = range->from;
      to = range->to;
    }
  }
  if (!opt.from.empty()) {
    const auto d = Date::parse(opt.from);
    if (!d) fail("CONFIG_INVALID", "bad --from");
    from = *d;
  }
  if (!opt.to.empty()) {
    const auto d = Date::parse(opt.to);
    if (!d) fail("CONFIG_INVALID", "bad --to");
    to = *d;
  }

  its::PowerSetup setup;
  bool have_treated = false, have_control = false;
  for (const auto& p : profiles) {
    if (p.org_id == opt.treated) {
      setup.treated = p;
      have_treated = true;
    }
    if (p.org_id == opt.control) {
      setup.control = p;
      have_control = true;
    }
  }
  if (!have_treated) fail("CONFIG_INVALID", "no profile named " + opt.treated);
  if (!have_control) fail("CONFIG_INVALID", "no profile named " + opt.control);
  const auto date = Date::parse(opt.date);
  if (!date) fail("CONFIG_INVALID", "bad --date: " + opt.date);
  setup.from = from;
  setup.to = to;
  setup.intervention_date = *date;

  const auto report = its::power_analysis(setup, opt.effects, opt.trials, opt.cfg, opt.seed);

  std::ostringstream body;
  body << "multiplier,trials,detection_rate,mean_effect,true_effect,bias\n";
  for (const auto& row : report.rows) {
    body << row.multiplier << "," << row.trials << "," << row.detection_rate << ","
         << row.mean_effect << "," << row.true_effect << "," << row.bias << "\n";
  }
  std::cout << body.str();
  std::ofstream out(opt.out);
  if (!out) fail("IO_ERROR", "cannot write " + opt.out);
  out << body.str();
  return 0;
}

struct GenerateOpts {
  bool defaults = false;
  std::string profile_path;
  std::string from, to;
  uint64_t seed = 1;
  std::string out;       // file path; stdout when empty
  std::string feed_out;  // write the matching synthetic feed here
};

int cmd_generate(const GenerateOpts& opt) {
  std::vector<synth::SynthProfile> profiles;
  Date from = synth::default_from(), to = synth::default_to();
  if (!opt.profile_path.empty()) {
    const auto cfg = KvConfig::parse_file(opt.profile_path);
    profiles = synth::profiles_from_config(cfg);
    if (const auto range = synth::range_from_config(cfg)) {
      from = range->from;
      to = range->to;
    }
  } else {
    profiles = synth::default_profiles();
  }
  if (!opt.from.empty()) {
    const auto d = Date::parse(opt.from);
    if (!d) fail("CONFIG_INVALID", "bad --from");
    from = *d;
  }
  if (!opt.to.empty()) {
    const auto d = Date::parse(opt.to);
    if (!d) fail("CONFIG_INVALID", "bad --to");
    to = *d;
  }

  if (!opt.feed_out.empty()) synth::write_bundled_feed(profiles, opt.feed_out);

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!opt.out.empty()) {
    file.open(opt.out);
    if (!file) fail("IO_ERROR", "cannot write " + opt.out);
    out = &file;
  }
  uint64_t count = 0;
  synth::generate(profiles, from, to, opt.seed, [&](const qlog::QueryRecord& r) {
    (*out) << qlog::to_jsonl(r) << "\n";
    ++count;
  });
  out->flush();
  std::cerr << "generated=" << count << "\n";
  return 0;
}

struct ReplayOpts {
  std::string input_jsonl;
  bool from_stdin = false;
  std::vector<std::string> endpoints;  // org=ip:port
  std::string target;                  // fallback
  int64_t timeout_ms = 2000;
  double speedup = 0.0;
};

int cmd_replay(const ReplayOpts& opt) {
  std::map<std::string, net::Endpoint> eps;
  for (const auto& e : opt.endpoints) {
    const size_t eq = e.find('=');
    if (eq == std::string::npos) fail("CONFIG_INVALID", "--endpoints expects org=ip:port");
    const auto ep = net::Endpoint::parse(e.substr(eq + 1));
    if (!ep) fail("CONFIG_INVALID", "bad endpoint: " + e);
    eps[e.substr(0, eq)] = *ep;
  }
  std::optional<net::Endpoint> fallback;
  if (!opt.target.empty()) {
    fallback = net::Endpoint::parse(opt.target);
    if (!fallback) fail("CONFIG_INVALID", "bad --target: " + opt.target);
  }

  std::unique_ptr<qlog::RecordReader> reader;
  std::ifstream file_in;
  if (opt.from_stdin) {
    reader = qlog::open_jsonl_stream(std::cin);
  } else if (!opt.input_jsonl.empty()) {
    file_in.open(opt.input_jsonl);
    if (!file_in) fail("FILE_UNREADABLE", "cannot open " + opt.input_jsonl);
    reader = qlog::open_jsonl_stream(file_in);
  } else {
    fail("CONFIG_INVALID", "replay needs --input or --stdin");
  }

  const auto stats = synth::replay(*reader, eps, fallback,
                                   std::chrono::milliseconds(opt.timeout_ms), opt.speedup);
  std::cout << "sent=" << stats.sent << " answered=" << stats.answered
            << " blocked=" << stats.blocked << " timeouts=" << stats.timeouts << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DNS firewall and hygiene-analytics toolkit"};
  app.require_subcommand(1);

  // serve
  std::string config_path;
  auto* serve = app.add_subcommand("serve", "run the firewall service");
  serve->add_option("--config", config_path, "service config file")->required();

  // feed stats
  auto* feed = app.add_subcommand("feed", "threat-intel feed utilities");
  feed->require_subcommand(1);
  auto* feed_stats = feed->add_subcommand("stats", "merged status/tag histogram");
  FeedOpts feed_stats_feeds;
  feed_stats_feeds.attach(feed_stats);

  // classify
  std::string classify_name;
  FeedOpts classify_feeds;
  auto* classify = app.add_subcommand("classify", "classify one FQDN against the feeds");
  classify->add_option("name", classify_name, "FQDN to classify")->required();
  classify_feeds.attach(classify);

  // ingest
  IngestOpts ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "import records into the native log tree");
  ingest_cmd->add_option("--csv", ingest.csv_path, "external CSV log");
  ingest_cmd->add_flag("--stdin", ingest.from_stdin, "read native JSONL from stdin");
  ingest_cmd->add_option("--input", ingest.input_jsonl, "native JSONL file");
  ingest_cmd->add_option("--log-dir", ingest.log_dir, "target log directory")->required();
  ingest.feeds.attach(ingest_cmd, /*required=*/false);
  ingest_cmd->add_option("--map-timestamp", ingest.map_ts, "CSV column for the timestamp");
  ingest_cmd->add_option("--map-org", ingest.map_org, "CSV column for the org id");
  ingest_cmd->add_option("--map-qname", ingest.map_qname, "CSV column for the qname");
  ingest_cmd->add_option("--map-qtype", ingest.map_qtype, "CSV column for the qtype");
  ingest_cmd->add_option("--map-class", ingest.map_class, "CSV column for the class");
  ingest_cmd->add_option("--map-action", ingest.map_action, "CSV column for the action");
  ingest_cmd->add_option("--map-rcode", ingest.map_rcode, "CSV column for the rcode");

  // report
  ReportOpts rep;
  auto* report_cmd = app.add_subcommand("report", "write the figure bundle (CSV + SVG)");
  rep.range.attach(report_cmd);
  rep.groups.attach(report_cmd);
  report_cmd->add_option("--out", rep.out_dir, "output directory");
  report_cmd->add_option("--top", rep.options.top_n, "top-FQDN list size");
  report_cmd->add_option("--exclude", rep.exclude, "FQDN to exclude from rankings");
  report_cmd->add_option("--track", rep.track, "FQDN to chart per-org");
  report_cmd->add_option("--spike-threshold", rep.options.spikes.threshold,
                         "GlobalPeak spike ratio");
  report_cmd->add_flag("--no-svg", rep.no_svg, "skip SVG figures");
  report_cmd->add_flag("--no-csv", rep.no_csv, "skip CSV series");

  // top
  LogRangeOpts top_range;
  size_t top_n = 15;
  std::vector<std::string> top_exclude;
  auto* top_cmd = app.add_subcommand("top", "most requested FQDNs");
  top_range.attach(top_cmd);
  top_cmd->add_option("-n,--n", top_n, "list size");
  top_cmd->add_option("--exclude", top_exclude, "FQDN to exclude");

  // spikes
  SpikeOpts spike;
  auto* spikes_cmd = app.add_subcommand("spikes", "flag anomalous days");
  spike.range.attach(spikes_cmd);
  spikes_cmd->add_option("--metric", spike.metric,
                         "malicious_count | grey_count | malicious_proportion");
  spikes_cmd->add_option("--scope", spike.scope, "org id or ALL");
  spikes_cmd->add_option("--threshold", spike.options.threshold, "ratio threshold");
  spikes_cmd->add_option("--mode", spike.mode, "global-peak | rolling-median");
  spikes_cmd->add_option("--window", spike.options.window, "rolling-median lookback days");
  spikes_cmd->add_option("--floor", spike.options.zero_median_floor,
                         "absolute floor for zero-median windows");

  // weekly
  LogRangeOpts weekly_range;
  std::string weekly_metric = "total", weekly_scope = analytics::kScopeAll;
  auto* weekly_cmd = app.add_subcommand("weekly", "weekday profile and workweek ratio");
  weekly_range.attach(weekly_cmd);
  weekly_cmd->add_option("--metric", weekly_metric, "total | benign | grey | malicious");
  weekly_cmd->add_option("--scope", weekly_scope, "org id or ALL");

  // compare
  LogRangeOpts compare_range;
  GroupOpts compare_groups;
  auto* compare_cmd = app.add_subcommand("compare", "control vs treatment summary");
  compare_range.attach(compare_cmd);
  compare_groups.attach(compare_cmd);

  // its
  ItsOpts its_opt;
  auto* its_cmd = app.add_subcommand("its", "interrupted-time-series effect estimate");
  its_opt.range.attach(its_cmd);
  its_opt.groups.attach(its_cmd);
  its_cmd->add_option("--org", its_opt.org, "treated org id")->required();
  its_cmd->add_option("--date", its_opt.date, "intervention date YYYY-MM-DD")->required();
  its_cmd->add_option("--metric", its_opt.metric, "grey | malicious");
  its_cmd->add_option("--pre", its_opt.cfg.pre_window, "pre-window days");
  its_cmd->add_option("--post", its_opt.cfg.post_window, "post-window days");
  its_cmd->add_option("--permutations", its_opt.cfg.n_permutations, "placebo count");
  its_cmd->add_option("--alpha", its_opt.cfg.alpha, "significance level");
  its_cmd->add_option("--seed", its_opt.cfg.rng_seed, "RNG seed");
  its_cmd->add_flag("--no-control-covariate", its_opt.no_control,
                    "fit without the control series");
  its_cmd->add_flag("--no-weekday-dummies", its_opt.no_weekday,
                    "fit without weekday terms");
  its_cmd->add_option("--out", its_opt.out, "effect CSV path");

  // power
  PowerOpts power;
  auto* power_cmd = app.add_subcommand("power", "detection power over an effect grid");
  power_cmd->add_flag("--defaults", power.defaults, "use the bundled six-org preset");
  power_cmd->add_option("--profile", power.profile_path, "profile config file");
  power_cmd->add_option("--treated", power.treated, "treated profile org id");
  power_cmd->add_option("--control", power.control, "control profile org id");
  power_cmd->add_option("--date", power.date, "intervention date");
  power_cmd->add_option("--from", power.from, "generation range start");
  power_cmd->add_option("--to", power.to, "generation range end");
  power_cmd->add_option("--effects", power.effects, "effect multipliers");
  power_cmd->add_option("--trials", power.trials, "trials per effect size");
  power_cmd->add_option("--seed", power.seed, "RNG seed");
  power_cmd->add_option("--metric", power.metric, "grey | malicious");
  power_cmd->add_option("--pre", power.cfg.pre_window, "pre-window days");
  power_cmd->add_option("--post", power.cfg.post_window, "post-window days");
  power_cmd->add_option("--permutations", power.cfg.n_permutations, "placebo count");
  power_cmd->add_option("--alpha", power.cfg.alpha, "significance level");
  power_cmd->add_option("--out", power.out, "power CSV path");

  // synth generate / replay
  auto* synth_cmd = app.add_subcommand("synth", "synthetic traffic");
  synth_cmd->require_subcommand(1);
  GenerateOpts gen;
  auto* gen_cmd = synth_cmd->add_subcommand("generate", "emit synthetic records as JSONL");
  gen_cmd->add_flag("--defaults", gen.defaults, "use the bundled six-org preset");
  gen_cmd->add_option("--profile", gen.profile_path, "profile config file");
  gen_cmd->add_option("--from", gen.from, "range start YYYY-MM-DD");
  gen_cmd->add_option("--to", gen.to, "range end YYYY-MM-DD");
  gen_cmd->add_option("--seed", gen.seed, "RNG seed");
  gen_cmd->add_option("--out", gen.out, "output file (default: stdout)");
  gen_cmd->add_option("--feed-out", gen.feed_out, "also write the matching feed CSV");

  ReplayOpts replay;
  auto* replay_cmd = synth_cmd->add_subcommand("replay", "replay records as live queries");
  replay_cmd->add_option("--input", replay.input_jsonl, "JSONL record file");
  replay_cmd->add_flag("--stdin", replay.from_stdin, "read records from stdin");
  replay_cmd->add_option("--endpoints", replay.endpoints, "org=ip:port (repeatable)");
  replay_cmd->add_option("--target", replay.target, "fallback endpoint for unmapped orgs");
  replay_cmd->add_option("--timeout", replay.timeout_ms, "per-query reply timeout ms");
  replay_cmd->add_option("--speedup", replay.speedup, "pacing speedup (0 = no pacing)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*serve) return cmd_serve(config_path);
    if (*feed_stats) return cmd_feed_stats(feed_stats_feeds);
    if (*classify) return cmd_classify(classify_name, classify_feeds);
    if (*ingest_cmd) return cmd_ingest(ingest);
    if (*report_cmd) return cmd_report(rep);
    if (*top_cmd) return cmd_top(top_range, top_n, top_exclude);
    if (*spikes_cmd) return cmd_spikes(spike);
    if (*weekly_cmd) return cmd_weekly(weekly_range, weekly_metric, weekly_scope);
    if (*compare_cmd) return cmd_compare(compare_range, compare_groups);
    if (*its_cmd) return cmd_its(its_opt);
    if (*power_cmd) return cmd_power(power);
    if (*gen_cmd) return cmd_generate(gen);
    if (*replay_cmd) return cmd_replay(replay);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "INTERNAL: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
