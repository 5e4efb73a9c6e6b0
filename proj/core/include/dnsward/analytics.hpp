#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dnsward/dates.hpp"
#include "dnsward/firewall.hpp"
#include "dnsward/query_log.hpp"
#include "dnsward/types.hpp"

namespace dnsward::analytics {

// Scope label for pooled-over-everything series.
inline constexpr const char* kScopeAll = "ALL";

struct DailyAggregate {
  Date date;
  std::string org_id;
  uint64_t total = 0;
  uint64_t malicious = 0;
  uint64_t grey = 0;
  uint64_t benign = 0;
  uint64_t distinct_qnames = 0;

  bool operator==(const DailyAggregate&) const = default;
};

// Incremental (org, date) aggregation so callers can stream arbitrarily
// large record sets through it.
class Aggregator {
 public:
  void add(const qlog::QueryRecord& r);
  // Sorted by (date, org). Resets the builder.
  std::vector<DailyAggregate> finish();

 private:
  struct Bucket {
    DailyAggregate agg;
    std::set<std::string> qnames;
  };
  std::map<std::pair<int32_t, std::string>, Bucket> buckets_;
};

std::vector<DailyAggregate> daily_aggregate(qlog::RecordReader& records);

struct ProportionPoint {
  Date date;
  std::string scope;  // org id, group name, or "ALL"
  double value = 0.0;
  bool defined = false;  // false on zero-total days; value is meaningless then
};

enum class Scope { Org, Group };

// Pooled per-day class proportion per scope, over the full [min,max] date
// range of the aggregates. Days without traffic for a scope yield
// defined=false, never a fabricated zero.
std::vector<ProportionPoint> proportion_series(
    const std::vector<DailyAggregate>& aggs, TrafficClass cls, Scope by,
    const std::vector<firewall::OrgBinding>& bindings);

std::vector<ProportionPoint> proportion_series_all(
    const std::vector<DailyAggregate>& aggs, TrafficClass cls);

// Filters one scope out of a mixed series, dates ascending.
std::vector<ProportionPoint> filter_scope(const std::vector<ProportionPoint>& series,
                                          const std::string& scope);

struct TopDomain {
  std::string qname;
  uint64_t count = 0;
};

class TopCounter {
 public:
  void add(const qlog::QueryRecord& r) { ++counts_[r.qname]; }
  // Top n by count descending, ties broken lexicographically; excluded
  // names are removed before ranking.
  std::vector<TopDomain> top(size_t n, const std::set<std::string>& exclude = {}) const;

 private:
  std::map<std::string, uint64_t> counts_;
};

std::vector<TopDomain> top_domains(qlog::RecordReader& records, size_t n,
                                   const std::set<std::string>& exclude = {});

struct DailyCount {
  Date date;
  uint64_t count = 0;
  bool operator==(const DailyCount&) const = default;
};

// Dense per-day counts for one qname (optionally one org), zero-filled over
// the observed [min,max] date range of the whole input stream.
struct DomainSeries {
  std::string qname;
  std::optional<std::string> org;
  std::vector<DailyCount> days;
};

class DomainSeriesCollector {
 public:
  DomainSeriesCollector(std::set<std::string> qnames, bool by_org)
      : qnames_(std::move(qnames)), by_org_(by_org) {}
  void add(const qlog::QueryRecord& r);
  std::vector<DomainSeries> finish() const;

 private:
  std::set<std::string> qnames_;
  bool by_org_;
  std::optional<Date> min_, max_;
  std::map<std::pair<std::string, std::string>, std::map<int32_t, uint64_t>> counts_;
};

std::vector<DomainSeries> domain_series(qlog::RecordReader& records,
                                        const std::set<std::string>& qnames, bool by_org);

enum class SpikeMetric { MaliciousCount, GreyCount, MaliciousProportion };
enum class SpikeMode { GlobalPeak, RollingMedian };

std::string_view to_string(SpikeMetric m);

struct SpikeFinding {
  Date date;
  std::string scope;
  SpikeMetric metric = SpikeMetric::MaliciousCount;
  double value = 0.0;
  double baseline = 0.0;
  double ratio = 0.0;
};

struct SpikeOptions {
  double threshold = 2.0;            // flag at value >= threshold * baseline
  SpikeMode mode = SpikeMode::GlobalPeak;
  int window = 7;                    // RollingMedian lookback, days
  double zero_median_floor = 10.0;   // RollingMedian with all-zero window
};

// GlobalPeak: baseline is the max over every other day. RollingMedian:
// baseline is the median of the preceding `window` days; a zero median
// flags only values above the configured absolute floor.
std::vector<SpikeFinding> detect_spikes(const std::vector<DailyAggregate>& aggs,
                                        SpikeMetric metric, const std::string& scope,
                                        SpikeOptions opt = {});

// Series-level variant; undefined days must already be removed.
std::vector<SpikeFinding> detect_spikes_series(
    const std::vector<std::pair<Date, double>>& series, SpikeMetric metric,
    const std::string& scope, SpikeOptions opt = {});

struct WeekdayProfile {
  std::array<double, 7> mean_counts{};  // Monday..Sunday
  std::array<uint32_t, 7> day_samples{};
  double workweek_ratio = 0.0;
  bool workweek_ratio_defined = false;
};

enum class CountMetric { Total, Malicious, Grey, Benign };

// Mean count per weekday over the aggregate range (absent days count as
// zero-traffic days). Requires >= 14 days of data. workweek_ratio is
// mean(Mon..Fri) / mean(Sat..Sun), defined only when the weekend mean > 0.
WeekdayProfile weekday_profile(const std::vector<DailyAggregate>& aggs,
                               CountMetric metric, const std::string& scope);

struct GroupSummary {
  double mean_malicious_proportion = 0.0;
  double mean_grey_proportion = 0.0;
  uint64_t days_zero_malicious = 0;
  uint64_t days_observed = 0;
  uint64_t total_requests = 0;
};

struct GroupReport {
  std::vector<DailyAggregate> per_group_daily;  // org_id carries the group name
  std::vector<ProportionPoint> malicious_by_group;
  std::vector<ProportionPoint> grey_by_group;
  std::map<std::string, GroupSummary> summaries;  // "control" / "treatment"
};

// Requires both groups present among the bindings' orgs.
GroupReport group_report(const std::vector<DailyAggregate>& aggs,
                         const std::vector<firewall::OrgBinding>& bindings);

}  // namespace dnsward::analytics
