#include "dnsward/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "dnsward/csv.hpp"

namespace dnsward::report {

namespace {

std::string fmt_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string fmt_count(uint64_t v) { return std::to_string(v); }

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& header) : out_(path) {
    if (!out_) fail("IO_ERROR", "cannot write " + path.string());
    out_ << header << "\n";
  }
  void row(const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_escape(fields[i]);
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

constexpr const char* kSeriesHeader = "date,scope,metric,value,defined";

void write_series_row(CsvFile& csv, Date date, const std::string& scope,
                      const std::string& metric, double value, bool defined) {
  csv.row({date.to_string(), scope, metric, defined ? fmt_value(value) : "",
           defined ? "1" : "0"});
}

}  // namespace

std::string org_color(const std::string& org_id, size_t fallback_index) {
  static const std::map<std::string, std::string> known = {
      {"red", "red"},       {"yellow", "gold"}, {"green", "green"},
      {"turquoise", "turquoise"}, {"blue", "blue"},  {"pink", "deeppink"},
  };
  const auto it = known.find(org_id);
  if (it != known.end()) return it->second;
  static const std::vector<std::string> palette = {
      "steelblue", "darkorange", "seagreen", "crimson",
      "mediumpurple", "sienna", "teal", "black"};
  return palette[fallback_index % palette.size()];
}

// SVG -------------------------------------------------------------------------

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string date_label(double days) {
  return Date(static_cast<int32_t>(std::llround(days))).to_string();
}

void chart_body(std::ostringstream& svg, const std::vector<SvgSeries>& series, int x0,
                int y0, int w, int h) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = 0.0, ymax = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (std::isnan(y)) continue;
      any = true;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymax = std::max(ymax, y);
    }
  }
  if (!any) {
    svg << "<text x=\"" << x0 + w / 2 << "\" y=\"" << y0 + h / 2
        << "\" text-anchor=\"middle\" font-size=\"12\">no data</text>\n";
    return;
  }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  ymax *= 1.05;

  const auto sx = [&](double x) { return x0 + (x - xmin) / (xmax - xmin) * w; };
  const auto sy = [&](double y) { return y0 + h - (y - ymin) / (ymax - ymin) * h; };

  // frame and horizontal gridlines with y labels
  svg << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << w << "\" height=\""
      << h << "\" fill=\"none\" stroke=\"#888\"/>\n";
  for (int i = 1; i <= 3; ++i) {
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    svg << "<line x1=\"" << x0 << "\" y1=\"" << sy(yv) << "\" x2=\"" << x0 + w
        << "\" y2=\"" << sy(yv) << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << x0 - 4 << "\" y=\"" << sy(yv) + 4
        << "\" text-anchor=\"end\" font-size=\"10\">" << fmt_value(yv) << "</text>\n";
  }
  svg << "<text x=\"" << x0 - 4 << "\" y=\"" << sy(ymax) + 4
      << "\" text-anchor=\"end\" font-size=\"10\">" << fmt_value(ymax) << "</text>\n";

  // x labels: first and last date
  svg << "<text x=\"" << x0 << "\" y=\"" << y0 + h + 14
      << "\" font-size=\"10\">" << date_label(xmin) << "</text>\n";
  svg << "<text x=\"" << x0 + w << "\" y=\"" << y0 + h + 14
      << "\" text-anchor=\"end\" font-size=\"10\">" << date_label(xmax) << "</text>\n";

  for (const auto& s : series) {
    std::string path;
    bool pen_down = false;
    for (const auto& [x, y] : s.points) {
      if (std::isnan(y)) {
        pen_down = false;
        continue;
      }
      path += pen_down ? " L" : " M";
      path += fmt_value(sx(x));
      path += ' ';
      path += fmt_value(sy(y));
      pen_down = true;
    }
    if (path.empty()) continue;
    svg << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.5\"/>\n";
  }
}

void legend(std::ostringstream& svg, const std::vector<SvgSeries>& series, int x, int y) {
  int cx = x;
  for (const auto& s : series) {
    if (s.label.empty()) continue;
    svg << "<rect x=\"" << cx << "\" y=\"" << y - 8 << "\" width=\"10\" height=\"10\" fill=\""
        << s.color << "\"/>\n";
    svg << "<text x=\"" << cx + 14 << "\" y=\"" << y << "\" font-size=\"11\">"
        << xml_escape(s.label) << "</text>\n";
    cx += 14 + 7 * static_cast<int>(s.label.size()) + 14;
  }
}

}  // namespace

std::string render_line_chart(const std::string& title, const std::vector<SvgSeries>& series,
                              int width, int height) {
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"sans-serif\">\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n";
  legend(svg, series, 70, 36);
  chart_body(svg, series, 70, 48, width - 90, height - 90);
  svg << "</svg>\n";
  return svg.str();
}

std::string render_grid(const std::string& title,
                        const std::vector<std::pair<std::string, std::vector<SvgSeries>>>& panels,
                        int panel_width, int panel_height) {
  const int cols = 2;
  const int rows = static_cast<int>((panels.size() + cols - 1) / cols);
  const int width = cols * panel_width;
  const int height = rows * panel_height + 30;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"sans-serif\">\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n";
  for (size_t i = 0; i < panels.size(); ++i) {
    const int px = static_cast<int>(i % cols) * panel_width;
    const int py = 30 + static_cast<int>(i / cols) * panel_height;
    svg << "<text x=\"" << px + panel_width / 2 << "\" y=\"" << py + 14
        << "\" text-anchor=\"middle\" font-size=\"12\">" << xml_escape(panels[i].first)
        << "</text>\n";
    chart_body(svg, panels[i].second, px + 60, py + 22, panel_width - 80, panel_height - 60);
  }
  svg << "</svg>\n";
  return svg.str();
}

// build ------------------------------------------------------------------------

ReportBundle build_report(const StreamFactory& open_stream,
                          const std::vector<firewall::OrgBinding>& bindings,
                          const ReportOptions& opt) {
  ReportBundle bundle;
  bundle.bindings = bindings;

  // pass 1: aggregates and ranking
  analytics::Aggregator agg;
  analytics::TopCounter top;
  {
    auto reader = open_stream();
    qlog::QueryRecord r;
    while (reader->next(r)) {
      agg.add(r);
      top.add(r);
    }
  }
  bundle.aggregates = agg.finish();
  bundle.top = top.top(opt.top_n);
  const std::set<std::string> exclude(opt.exclude.begin(), opt.exclude.end());
  if (!exclude.empty()) bundle.top_excluded = top.top(opt.top_n, exclude);

  if (bundle.aggregates.empty()) return bundle;

  bundle.malicious_all =
      analytics::proportion_series_all(bundle.aggregates, TrafficClass::Malicious);
  bundle.grey_by_org = analytics::proportion_series(bundle.aggregates, TrafficClass::Grey,
                                                    analytics::Scope::Org, bindings);
  try {
    bundle.groups = analytics::group_report(bundle.aggregates, bindings);
  } catch (const Error&) {
    // single-group data: group figures stay empty
  }
  try {
    bundle.spikes = analytics::detect_spikes(bundle.aggregates, opt.spike_metric,
                                             analytics::kScopeAll, opt.spikes);
  } catch (const Error&) {
  }
  for (const auto& b : bindings) {
    try {
      bundle.weekday_grey[b.org_id] = analytics::weekday_profile(
          bundle.aggregates, analytics::CountMetric::Grey, b.org_id);
    } catch (const Error&) {
    }
  }

  // pass 2: per-domain daily series
  std::set<std::string> wanted, wanted_by_org;
  for (const auto& t : bundle.top) wanted.insert(t.qname);
  for (const auto& t : bundle.top_excluded) wanted.insert(t.qname);
  for (const auto& t : opt.track) wanted_by_org.insert(t);
  if (!wanted.empty() || !wanted_by_org.empty()) {
    analytics::DomainSeriesCollector flat(wanted, false);
    analytics::DomainSeriesCollector by_org(wanted_by_org, true);
    auto reader = open_stream();
    qlog::QueryRecord r;
    while (reader->next(r)) {
      flat.add(r);
      if (!wanted_by_org.empty()) by_org.add(r);
    }
    auto all_series = flat.finish();
    const auto series_for = [&](const std::vector<analytics::TopDomain>& ranked) {
      std::vector<analytics::DomainSeries> out;
      for (const auto& t : ranked) {
        for (const auto& s : all_series) {
          if (s.qname == t.qname) out.push_back(s);
        }
      }
      return out;
    };
    bundle.top_series = series_for(bundle.top);
    bundle.top_series_excluded = series_for(bundle.top_excluded);
    if (!wanted_by_org.empty()) bundle.tracked_series = by_org.finish();
  }
  return bundle;
}

// emit -------------------------------------------------------------------------

std::vector<std::filesystem::path> emit_report(const ReportBundle& bundle,
                                               const std::filesystem::path& out_dir,
                                               const ReportOptions& opt) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail("IO_ERROR", "cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  const auto add = [&](const std::filesystem::path& p) { written.push_back(p); };

  // daily totals pooled over all orgs
  std::map<int32_t, analytics::DailyAggregate> daily_all;
  for (const auto& a : bundle.aggregates) {
    auto& d = daily_all[a.date.days()];
    d.date = a.date;
    d.total += a.total;
    d.malicious += a.malicious;
    d.grey += a.grey;
    d.benign += a.benign;
  }

  if (opt.csv) {
    {
      CsvFile csv(out_dir / "total_requests.csv", kSeriesHeader);
      for (const auto& [_, d] : daily_all) {
        write_series_row(csv, d.date, analytics::kScopeAll, "total",
                         static_cast<double>(d.total), true);
      }
      add(out_dir / "total_requests.csv");
    }
    {
      CsvFile csv(out_dir / "benign_vs_malicious.csv", kSeriesHeader);
      for (const auto& [_, d] : daily_all) {
        write_series_row(csv, d.date, analytics::kScopeAll, "benign",
                         static_cast<double>(d.benign), true);
        write_series_row(csv, d.date, analytics::kScopeAll, "malicious",
                         static_cast<double>(d.malicious), true);
      }
      add(out_dir / "benign_vs_malicious.csv");
    }
    {
      CsvFile csv(out_dir / "malicious_proportion.csv", kSeriesHeader);
      for (const auto& p : bundle.malicious_all) {
        write_series_row(csv, p.date, p.scope, "malicious_proportion", p.value, p.defined);
      }
      add(out_dir / "malicious_proportion.csv");
    }
    {
      CsvFile csv(out_dir / "top_domains_rank.csv", "rank,qname,count");
      for (size_t i = 0; i < bundle.top.size(); ++i) {
        csv.row({std::to_string(i + 1), bundle.top[i].qname, fmt_count(bundle.top[i].count)});
      }
      add(out_dir / "top_domains_rank.csv");
    }
    {
      CsvFile csv(out_dir / "top_domains.csv", kSeriesHeader);
      for (const auto& s : bundle.top_series) {
        for (const auto& d : s.days) {
          write_series_row(csv, d.date, s.qname, "count", static_cast<double>(d.count), true);
        }
      }
      add(out_dir / "top_domains.csv");
    }
    if (!opt.exclude.empty()) {
      CsvFile rank(out_dir / "top_domains_excluded_rank.csv", "rank,qname,count");
      for (size_t i = 0; i < bundle.top_excluded.size(); ++i) {
        rank.row({std::to_string(i + 1), bundle.top_excluded[i].qname,
                  fmt_count(bundle.top_excluded[i].count)});
      }
      add(out_dir / "top_domains_excluded_rank.csv");
      CsvFile csv(out_dir / "top_domains_excluded.csv", kSeriesHeader);
      for (const auto& s : bundle.top_series_excluded) {
        for (const auto& d : s.days) {
          write_series_row(csv, d.date, s.qname, "count", static_cast<double>(d.count), true);
        }
      }
      add(out_dir / "top_domains_excluded.csv");
    }
    {
      CsvFile csv(out_dir / "per_org_summary.csv", kSeriesHeader);
      for (const auto& a : bundle.aggregates) {
        write_series_row(csv, a.date, a.org_id, "total", static_cast<double>(a.total), true);
        write_series_row(csv, a.date, a.org_id, "benign", static_cast<double>(a.benign), true);
        write_series_row(csv, a.date, a.org_id, "malicious",
                         static_cast<double>(a.malicious), true);
      }
      add(out_dir / "per_org_summary.csv");
    }
    {
      CsvFile csv(out_dir / "grey_proportion_by_org.csv", kSeriesHeader);
      for (const auto& p : bundle.grey_by_org) {
        write_series_row(csv, p.date, p.scope, "grey_proportion", p.value, p.defined);
      }
      add(out_dir / "grey_proportion_by_org.csv");
    }
    {
      CsvFile csv(out_dir / "group_malicious_proportion.csv", kSeriesHeader);
      for (const auto& p : bundle.groups.malicious_by_group) {
        write_series_row(csv, p.date, p.scope, "malicious_proportion", p.value, p.defined);
      }
      add(out_dir / "group_malicious_proportion.csv");
    }
    {
      CsvFile csv(out_dir / "group_grey_proportion.csv", kSeriesHeader);
      for (const auto& p : bundle.groups.grey_by_group) {
        write_series_row(csv, p.date, p.scope, "grey_proportion", p.value, p.defined);
      }
      add(out_dir / "group_grey_proportion.csv");
    }
    if (!opt.track.empty()) {
      CsvFile csv(out_dir / "tracked_domains.csv", kSeriesHeader);
      for (const auto& s : bundle.tracked_series) {
        const std::string scope = s.qname + (s.org ? "|" + *s.org : "");
        for (const auto& d : s.days) {
          write_series_row(csv, d.date, scope, "count", static_cast<double>(d.count), true);
        }
      }
      add(out_dir / "tracked_domains.csv");
    }
    {
      CsvFile csv(out_dir / "spikes.csv", "date,scope,metric,value,baseline,ratio");
      for (const auto& f : bundle.spikes) {
        csv.row({f.date.to_string(), f.scope, std::string(to_string(f.metric)),
                 fmt_value(f.value), fmt_value(f.baseline), fmt_value(f.ratio)});
      }
      add(out_dir / "spikes.csv");
    }
    {
      CsvFile csv(out_dir / "weekday_grey.csv",
                  "org,weekday,mean_count,workweek_ratio,ratio_defined");
      static const char* days[7] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};
      for (const auto& [org, profile] : bundle.weekday_grey) {
        for (int i = 0; i < 7; ++i) {
          csv.row({org, days[i], fmt_value(profile.mean_counts[i]),
                   profile.workweek_ratio_defined ? fmt_value(profile.workweek_ratio) : "",
                   profile.workweek_ratio_defined ? "1" : "0"});
        }
      }
      add(out_dir / "weekday_grey.csv");
    }
    {
      CsvFile csv(out_dir / "group_summary.csv",
                  "group,mean_malicious_proportion,mean_grey_proportion,days_zero_malicious,"
                  "days_observed,total_requests");
      for (const auto& [group, s] : bundle.groups.summaries) {
        csv.row({group, fmt_value(s.mean_malicious_proportion),
                 fmt_value(s.mean_grey_proportion), fmt_count(s.days_zero_malicious),
                 fmt_count(s.days_observed), fmt_count(s.total_requests)});
      }
      add(out_dir / "group_summary.csv");
    }
  }

  if (!opt.svg || bundle.aggregates.empty()) return written;

  const auto write_svg = [&](const std::string& name, const std::string& content) {
    const auto path = out_dir / name;
    std::ofstream out(path);
    if (!out) fail("IO_ERROR", "cannot write " + path.string());
    out << content;
    add(path);
  };

  const auto proportion_points = [](const std::vector<analytics::ProportionPoint>& pts) {
    std::vector<std::pair<double, double>> out;
    for (const auto& p : pts) {
      out.emplace_back(p.date.days(),
                       p.defined ? p.value : std::numeric_limits<double>::quiet_NaN());
    }
    return out;
  };

  {
    SvgSeries total{"total", "steelblue", {}};
    for (const auto& [_, d] : daily_all) {
      total.points.emplace_back(d.date.days(), static_cast<double>(d.total));
    }
    write_svg("total_requests.svg", render_line_chart("Total requests per day", {total}));
  }
  {
    SvgSeries benign{"benign", "seagreen", {}}, malicious{"malicious", "crimson", {}};
    for (const auto& [_, d] : daily_all) {
      benign.points.emplace_back(d.date.days(), static_cast<double>(d.benign));
      malicious.points.emplace_back(d.date.days(), static_cast<double>(d.malicious));
    }
    write_svg("benign_vs_malicious.svg",
              render_line_chart("Benign and malicious requests per day", {benign, malicious}));
  }
  {
    SvgSeries s{"malicious", "crimson", proportion_points(bundle.malicious_all)};
    write_svg("malicious_proportion.svg",
              render_line_chart("Proportion of requests classified malicious", {s}));
  }
  const auto domain_chart = [&](const std::vector<analytics::DomainSeries>& series) {
    std::vector<SvgSeries> lines;
    size_t idx = 0;
    for (const auto& s : series) {
      SvgSeries line{s.qname, org_color("", idx++), {}};
      for (const auto& d : s.days) {
        line.points.emplace_back(d.date.days(), static_cast<double>(d.count));
      }
      lines.push_back(std::move(line));
    }
    return lines;
  };
  if (!bundle.top_series.empty()) {
    write_svg("top_domains.svg",
              render_line_chart("Most requested FQDNs", domain_chart(bundle.top_series), 1100, 420));
  }
  if (!bundle.top_series_excluded.empty()) {
    write_svg("top_domains_excluded.svg",
              render_line_chart("Most requested FQDNs (anomalous entries removed)",
                                domain_chart(bundle.top_series_excluded), 1100, 420));
  }
  {
    // per-org grid: total / benign / malicious lines
    std::map<std::string, std::map<int32_t, analytics::DailyAggregate>> per_org;
    for (const auto& a : bundle.aggregates) per_org[a.org_id][a.date.days()] = a;
    std::vector<std::pair<std::string, std::vector<SvgSeries>>> panels;
    for (const auto& [org, days] : per_org) {
      SvgSeries total{"total", "steelblue", {}}, benign{"benign", "seagreen", {}},
          malicious{"malicious", "crimson", {}};
      for (const auto& [_, a] : days) {
        total.points.emplace_back(a.date.days(), static_cast<double>(a.total));
        benign.points.emplace_back(a.date.days(), static_cast<double>(a.benign));
        malicious.points.emplace_back(a.date.days(), static_cast<double>(a.malicious));
      }
      panels.emplace_back(org, std::vector<SvgSeries>{total, benign, malicious});
    }
    write_svg("per_org_summary.svg",
              render_grid("Requests per organisation (total / benign / malicious)", panels));
  }
  {
    std::map<std::string, std::vector<analytics::ProportionPoint>> per_org;
    for (const auto& p : bundle.grey_by_org) per_org[p.scope].push_back(p);
    std::vector<std::pair<std::string, std::vector<SvgSeries>>> panels;
    size_t idx = 0;
    for (const auto& [org, pts] : per_org) {
      SvgSeries s{org, org_color(org, idx++), proportion_points(pts)};
      panels.emplace_back(org, std::vector<SvgSeries>{s});
    }
    write_svg("grey_proportion_by_org.svg",
              render_grid("Proportion of grey requests per organisation", panels));
  }
  const auto group_chart = [&](const std::vector<analytics::ProportionPoint>& pts,
                               const std::string& title, const std::string& file) {
    std::map<std::string, std::vector<analytics::ProportionPoint>> per_group;
    for (const auto& p : pts) per_group[p.scope].push_back(p);
    std::vector<SvgSeries> lines;
    for (const auto& [group, series] : per_group) {
      lines.push_back({group, group == "control" ? "steelblue" : "crimson",
                       proportion_points(series)});
    }
    if (!lines.empty()) write_svg(file, render_line_chart(title, lines));
  };
  group_chart(bundle.groups.malicious_by_group,
              "Proportion of malicious requests: control vs treatment",
              "group_malicious_proportion.svg");
  group_chart(bundle.groups.grey_by_group,
              "Proportion of grey requests: control vs treatment",
              "group_grey_proportion.svg");
  if (!bundle.tracked_series.empty()) {
    std::map<std::string, std::vector<SvgSeries>> by_qname;
    std::map<std::string, size_t> color_idx;
    for (const auto& s : bundle.tracked_series) {
      const std::string org = s.org.value_or("all");
      SvgSeries line{org, org_color(org, color_idx[s.qname]++), {}};
      for (const auto& d : s.days) {
        line.points.emplace_back(d.date.days(), static_cast<double>(d.count));
      }
      by_qname[s.qname].push_back(std::move(line));
    }
    std::vector<std::pair<std::string, std::vector<SvgSeries>>> panels;
    for (auto& [qname, lines] : by_qname) panels.emplace_back(qname, std::move(lines));
    write_svg("tracked_domains.svg",
              render_grid("Tracked domains by organisation", panels));
  }

  return written;
}

}  // namespace dnsward::report
