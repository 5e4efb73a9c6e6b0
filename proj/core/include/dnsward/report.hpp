#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dnsward/analytics.hpp"

namespace dnsward::report {

struct ReportOptions {
  size_t top_n = 15;
  std::vector<std::string> exclude;  // anomalous FQDNs removed before ranking
  std::vector<std::string> track;    // domains charted per-org (adware tracking)
  analytics::SpikeOptions spikes;    // GlobalPeak r=2 by default
  analytics::SpikeMetric spike_metric = analytics::SpikeMetric::MaliciousCount;
  bool csv = true;
  bool svg = true;
};

// Everything the figure bundle needs, computed in two streaming passes.
struct ReportBundle {
  std::vector<analytics::DailyAggregate> aggregates;
  std::vector<firewall::OrgBinding> bindings;

  std::vector<analytics::ProportionPoint> malicious_all;
  std::vector<analytics::ProportionPoint> grey_by_org;
  analytics::GroupReport groups;

  std::vector<analytics::TopDomain> top;
  std::vector<analytics::TopDomain> top_excluded;
  std::vector<analytics::DomainSeries> top_series;          // daily lines, Fig-4 style
  std::vector<analytics::DomainSeries> top_series_excluded;
  std::vector<analytics::DomainSeries> tracked_series;      // per-org, when requested

  std::vector<analytics::SpikeFinding> spikes;
  std::map<std::string, analytics::WeekdayProfile> weekday_grey;  // per org
};

// `open_stream` must yield a fresh reader over the same records each call
// (the bundle needs two passes: aggregate + ranking, then per-domain series).
using StreamFactory = std::function<std::unique_ptr<qlog::RecordReader>()>;

ReportBundle build_report(const StreamFactory& open_stream,
                          const std::vector<firewall::OrgBinding>& bindings,
                          const ReportOptions& opt);

// Writes the CSV/SVG bundle; returns the paths written. File names are
// stable and documented in docs/cli.md. CSV schema: date,scope,metric,value,defined.
std::vector<std::filesystem::path> emit_report(const ReportBundle& bundle,
                                               const std::filesystem::path& out_dir,
                                               const ReportOptions& opt);

// Minimal self-contained SVG line chart (one polyline per series, gaps on
// undefined points).
struct SvgSeries {
  std::string label;
  std::string color;
  // x ascending; NaN y breaks the line
  std::vector<std::pair<double, double>> points;
};

std::string render_line_chart(const std::string& title, const std::vector<SvgSeries>& series,
                              int width = 900, int height = 360);

// Small-multiples grid of charts (per-org figures).
std::string render_grid(const std::string& title,
                        const std::vector<std::pair<std::string, std::vector<SvgSeries>>>& panels,
                        int panel_width = 450, int panel_height = 220);

// Chart color for an org id; color-named orgs (the bundled preset) map to
// themselves.
std::string org_color(const std::string& org_id, size_t fallback_index);

}  // namespace dnsward::report
