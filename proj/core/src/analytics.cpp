#include "dnsward/analytics.hpp"

#include <algorithm>
#include <cmath>

namespace dnsward::analytics {

// Aggregator -----------------------------------------------------------------

void Aggregator::add(const qlog::QueryRecord& r) {
  const Date d = r.date();
  Bucket& b = buckets_[{d.days(), r.org_id}];
  b.agg.date = d;
  b.agg.org_id = r.org_id;
  ++b.agg.total;
  switch (r.cls) {
    case TrafficClass::Malicious: ++b.agg.malicious; break;
    case TrafficClass::Grey: ++b.agg.grey; break;
    case TrafficClass::Benign: ++b.agg.benign; break;
  }
  b.qnames.insert(r.qname);
}

std::vector<DailyAggregate> Aggregator::finish() {
  std::vector<DailyAggregate> out;
  out.reserve(buckets_.size());
  for (auto& [_, b] : buckets_) {
    b.agg.distinct_qnames = b.qnames.size();
    out.push_back(std::move(b.agg));
  }
  buckets_.clear();
  return out;
}

std::vector<DailyAggregate> daily_aggregate(qlog::RecordReader& records) {
  Aggregator agg;
  qlog::QueryRecord r;
  while (records.next(r)) agg.add(r);
  return agg.finish();
}

// Proportions ----------------------------------------------------------------

namespace {

uint64_t class_count(const DailyAggregate& a, TrafficClass cls) {
  switch (cls) {
    case TrafficClass::Malicious: return a.malicious;
    case TrafficClass::Grey: return a.grey;
    case TrafficClass::Benign: return a.benign;
  }
  return 0;
}

uint64_t metric_count(const DailyAggregate& a, CountMetric m) {
  switch (m) {
    case CountMetric::Total: return a.total;
    case CountMetric::Malicious: return a.malicious;
    case CountMetric::Grey: return a.grey;
    case CountMetric::Benign: return a.benign;
  }
  return 0;
}

struct DateRange {
  Date min, max;
  bool any = false;
};

DateRange range_of(const std::vector<DailyAggregate>& aggs) {
  DateRange r;
  for (const auto& a : aggs) {
    if (!r.any) {
      r.min = r.max = a.date;
      r.any = true;
    } else {
      r.min = std::min(r.min, a.date);
      r.max = std::max(r.max, a.date);
    }
  }
  return r;
}

std::vector<ProportionPoint> pooled_proportions(
    const std::vector<DailyAggregate>& aggs, TrafficClass cls,
    const std::map<std::string, std::string>& scope_of_org) {
  // (scope, day) -> (class count, total)
  std::map<std::pair<std::string, int32_t>, std::pair<uint64_t, uint64_t>> pools;
  std::set<std::string> scopes;
  for (const auto& [_, scope] : scope_of_org) scopes.insert(scope);

  const DateRange range = range_of(aggs);
  for (const auto& a : aggs) {
    const auto it = scope_of_org.find(a.org_id);
    if (it == scope_of_org.end()) {
      fail("CONFIG_INVALID", "org without binding in group series: " + a.org_id);
    }
    auto& pool = pools[{it->second, a.date.days()}];
    pool.first += class_count(a, cls);
    pool.second += a.total;
  }

  std::vector<ProportionPoint> out;
  if (!range.any) return out;
  for (const auto& scope : scopes) {
    for (Date d = range.min; d <= range.max; ++d) {
      ProportionPoint p;
      p.date = d;
      p.scope = scope;
      const auto it = pools.find({scope, d.days()});
      if (it != pools.end() && it->second.second > 0) {
        p.defined = true;
        p.value = static_cast<double>(it->second.first) /
                  static_cast<double>(it->second.second);
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace

std::vector<ProportionPoint> proportion_series(
    const std::vector<DailyAggregate>& aggs, TrafficClass cls, Scope by,
    const std::vector<firewall::OrgBinding>& bindings) {
  std::map<std::string, std::string> scope_of_org;
  if (by == Scope::Org) {
    for (const auto& a : aggs) scope_of_org[a.org_id] = a.org_id;
  } else {
    for (const auto& b : bindings) {
      scope_of_org[b.org_id] = std::string(to_string(b.group));
    }
  }
  return pooled_proportions(aggs, cls, scope_of_org);
}

std::vector<ProportionPoint> proportion_series_all(
    const std::vector<DailyAggregate>& aggs, TrafficClass cls) {
  std::map<std::string, std::string> scope_of_org;
  for (const auto& a : aggs) scope_of_org[a.org_id] = kScopeAll;
  return pooled_proportions(aggs, cls, scope_of_org);
}

std::vector<ProportionPoint> filter_scope(const std::vector<ProportionPoint>& series,
                                          const std::string& scope) {
  std::vector<ProportionPoint> out;
  for (const auto& p : series) {
    if (p.scope == scope) out.push_back(p);
  }
  std::sort(out.begin(), out.end(),
            [](const ProportionPoint& a, const ProportionPoint& b) { return a.date < b.date; });
  return out;
}

// Top domains ----------------------------------------------------------------

std::vector<TopDomain> TopCounter::top(size_t n, const std::set<std::string>& exclude) const {
  std::vector<TopDomain> all;
  all.reserve(counts_.size());
  for (const auto& [qname, count] : counts_) {
    if (exclude.count(qname)) continue;
    all.push_back({qname, count});
  }
  // counts_ is qname-sorted, so stable_sort by count keeps lexicographic ties
  std::stable_sort(all.begin(), all.end(), [](const TopDomain& a, const TopDomain& b) {
    return a.count > b.count;
  });
  if (all.size() > n) all.resize(n);
  return all;
}

std::vector<TopDomain> top_domains(qlog::RecordReader& records, size_t n,
                                   const std::set<std::string>& exclude) {
  if (n < 1) fail("CONFIG_INVALID", "top_domains requires n >= 1");
  TopCounter counter;
  qlog::QueryRecord r;
  while (records.next(r)) counter.add(r);
  return counter.top(n, exclude);
}

// Domain series ----------------------------------------------------------------

void DomainSeriesCollector::add(const qlog::QueryRecord& r) {
  const Date d = r.date();
  if (!min_ || d < *min_) min_ = d;
  if (!max_ || d > *max_) max_ = d;
  if (!qnames_.count(r.qname)) return;
  const std::string org = by_org_ ? r.org_id : std::string();
  ++counts_[{r.qname, org}][d.days()];
}

std::vector<DomainSeries> DomainSeriesCollector::finish() const {
  std::vector<DomainSeries> out;
  if (!min_) return out;

  // every requested qname appears, and when splitting by org every observed
  // (qname, org) pair does
  std::set<std::pair<std::string, std::string>> keys;
  for (const auto& [key, _] : counts_) keys.insert(key);
  if (!by_org_) {
    for (const auto& q : qnames_) keys.insert({q, ""});
  }

  for (const auto& [qname, org] : keys) {
    DomainSeries s;
    s.qname = qname;
    if (by_org_) s.org = org;
    const auto it = counts_.find({qname, org});
    for (Date d = *min_; d <= *max_; ++d) {
      uint64_t c = 0;
      if (it != counts_.end()) {
        const auto day = it->second.find(d.days());
        if (day != it->second.end()) c = day->second;
      }
      s.days.push_back({d, c});
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<DomainSeries> domain_series(qlog::RecordReader& records,
                                        const std::set<std::string>& qnames, bool by_org) {
  if (qnames.empty()) fail("CONFIG_INVALID", "domain_series requires at least one qname");
  DomainSeriesCollector collector(qnames, by_org);
  qlog::QueryRecord r;
  while (records.next(r)) collector.add(r);
  return collector.finish();
}

// Spikes -----------------------------------------------------------------------

std::string_view to_string(SpikeMetric m) {
  switch (m) {
    case SpikeMetric::MaliciousCount: return "malicious_count";
    case SpikeMetric::GreyCount: return "grey_count";
    case SpikeMetric::MaliciousProportion: return "malicious_proportion";
  }
  return "malicious_count";
}

std::vector<SpikeFinding> detect_spikes_series(
    const std::vector<std::pair<Date, double>>& series, SpikeMetric metric,
    const std::string& scope, SpikeOptions opt) {
  std::vector<SpikeFinding> out;
  if (opt.mode == SpikeMode::GlobalPeak) {
    if (series.size() < 2) fail("INSUFFICIENT_DATA", "GlobalPeak needs at least 2 days");
    // max and second max let us compute max-of-others in one pass
    double max1 = -1.0, max2 = -1.0;
    for (const auto& [_, v] : series) {
      if (v > max1) {
        max2 = max1;
        max1 = v;
      } else if (v > max2) {
        max2 = v;
      }
    }
    for (const auto& [date, value] : series) {
      const double baseline = (value == max1) ? max2 : max1;
      bool flagged;
      if (baseline <= 0.0) {
        flagged = value > 0.0;
      } else {
        flagged = value >= opt.threshold * baseline;
      }
      if (!flagged) continue;
      SpikeFinding f;
      f.date = date;
      f.scope = scope;
      f.metric = metric;
      f.value = value;
      f.baseline = std::max(baseline, 0.0);
      f.ratio = baseline > 0.0 ? value / baseline
                               : std::numeric_limits<double>::infinity();
      out.push_back(std::move(f));
    }
  } else {
    const size_t window = static_cast<size_t>(opt.window);
    if (series.size() < window + 1) {
      fail("INSUFFICIENT_DATA", "RollingMedian needs at least window+1 days");
    }
    for (size_t i = window; i < series.size(); ++i) {
      std::vector<double> prior;
      prior.reserve(window);
      for (size_t j = i - window; j < i; ++j) prior.push_back(series[j].second);
      std::sort(prior.begin(), prior.end());
      const double median = window % 2 ? prior[window / 2]
                                       : 0.5 * (prior[window / 2 - 1] + prior[window / 2]);
      const double value = series[i].second;
      bool flagged;
      if (median <= 0.0) {
        flagged = value > 0.0 && value > opt.zero_median_floor;
      } else {
        flagged = value >= opt.threshold * median;
      }
      if (!flagged) continue;
      SpikeFinding f;
      f.date = series[i].first;
      f.scope = scope;
      f.metric = metric;
      f.value = value;
      f.baseline = std::max(median, 0.0);
      f.ratio = median > 0.0 ? value / median : std::numeric_limits<double>::infinity();
      out.push_back(std::move(f));
    }
  }
  return out;
}

std::vector<SpikeFinding> detect_spikes(const std::vector<DailyAggregate>& aggs,
                                        SpikeMetric metric, const std::string& scope,
                                        SpikeOptions opt) {
  // pooled daily values for the scope, dense over the range (counts default
  // to zero on silent days; proportions skip undefined days)
  const DateRange range = range_of(aggs);
  std::vector<std::pair<Date, double>> series;
  if (!range.any) return {};

  std::map<int32_t, std::pair<uint64_t, uint64_t>> by_day;  // metric count, total
  for (const auto& a : aggs) {
    if (scope != kScopeAll && a.org_id != scope) continue;
    auto& slot = by_day[a.date.days()];
    switch (metric) {
      case SpikeMetric::MaliciousCount:
      case SpikeMetric::MaliciousProportion:
        slot.first += a.malicious;
        break;
      case SpikeMetric::GreyCount:
        slot.first += a.grey;
        break;
    }
    slot.second += a.total;
  }

  for (Date d = range.min; d <= range.max; ++d) {
    const auto it = by_day.find(d.days());
    if (metric == SpikeMetric::MaliciousProportion) {
      if (it == by_day.end() || it->second.second == 0) continue;  // undefined day
      series.emplace_back(d, static_cast<double>(it->second.first) /
                                 static_cast<double>(it->second.second));
    } else {
      series.emplace_back(d, it == by_day.end() ? 0.0
                                                : static_cast<double>(it->second.first));
    }
  }
  return detect_spikes_series(series, metric, scope, opt);
}

// Weekday profile ----------------------------------------------------------------

WeekdayProfile weekday_profile(const std::vector<DailyAggregate>& aggs,
                               CountMetric metric, const std::string& scope) {
  const DateRange range = range_of(aggs);
  if (!range.any || range.max - range.min + 1 < 14) {
    fail("INSUFFICIENT_DATA", "weekday profile needs at least 14 days of data");
  }
  std::map<int32_t, uint64_t> by_day;
  for (const auto& a : aggs) {
    if (scope != kScopeAll && a.org_id != scope) continue;
    by_day[a.date.days()] += metric_count(a, metric);
  }

  std::array<double, 7> sums{};
  std::array<uint32_t, 7> samples{};
  for (Date d = range.min; d <= range.max; ++d) {
    const auto it = by_day.find(d.days());
    const uint64_t count = it == by_day.end() ? 0 : it->second;
    sums[d.weekday()] += static_cast<double>(count);
    ++samples[d.weekday()];
  }

  WeekdayProfile profile;
  profile.day_samples = samples;
  for (int i = 0; i < 7; ++i) {
    profile.mean_counts[i] = samples[i] ? sums[i] / samples[i] : 0.0;
  }
  double weekday_mean = 0.0, weekend_mean = 0.0;
  for (int i = 0; i < 5; ++i) weekday_mean += profile.mean_counts[i];
  weekday_mean /= 5.0;
  weekend_mean = (profile.mean_counts[5] + profile.mean_counts[6]) / 2.0;
  if (weekend_mean > 0.0) {
    profile.workweek_ratio = weekday_mean / weekend_mean;
    profile.workweek_ratio_defined = true;
  }
  return profile;
}

// Group report ----------------------------------------------------------------

GroupReport group_report(const std::vector<DailyAggregate>& aggs,
                         const std::vector<firewall::OrgBinding>& bindings) {
  bool have_control = false, have_treatment = false;
  std::map<std::string, std::string> group_of;
  for (const auto& b : bindings) {
    group_of[b.org_id] = std::string(to_string(b.group));
    if (b.group == Group::Control) have_control = true;
    else have_treatment = true;
  }
  if (!have_control || !have_treatment) {
    fail("INSUFFICIENT_DATA", "group report requires both control and treatment orgs");
  }

  GroupReport report;
  report.malicious_by_group =
      proportion_series(aggs, TrafficClass::Malicious, Scope::Group, bindings);
  report.grey_by_group = proportion_series(aggs, TrafficClass::Grey, Scope::Group, bindings);

  // pooled per-group daily aggregates
  std::map<std::pair<int32_t, std::string>, DailyAggregate> pooled;
  for (const auto& a : aggs) {
    const auto it = group_of.find(a.org_id);
    if (it == group_of.end()) {
      fail("CONFIG_INVALID", "org without binding in group report: " + a.org_id);
    }
    DailyAggregate& g = pooled[{a.date.days(), it->second}];
    g.date = a.date;
    g.org_id = it->second;
    g.total += a.total;
    g.malicious += a.malicious;
    g.grey += a.grey;
    g.benign += a.benign;
    g.distinct_qnames = 0;  // not meaningful for pooled rows
  }
  for (const auto& [_, g] : pooled) report.per_group_daily.push_back(g);

  const DateRange range = range_of(aggs);
  for (const auto& group : {std::string("control"), std::string("treatment")}) {
    GroupSummary s;
    double mal_sum = 0.0, grey_sum = 0.0;
    uint64_t defined_days = 0;
    for (Date d = range.min; range.any && d <= range.max; ++d) {
      const auto it = pooled.find({d.days(), group});
      const uint64_t malicious = it == pooled.end() ? 0 : it->second.malicious;
      const uint64_t total = it == pooled.end() ? 0 : it->second.total;
      if (malicious == 0) ++s.days_zero_malicious;
      ++s.days_observed;
      if (total > 0) {
        ++defined_days;
        mal_sum += static_cast<double>(malicious) / static_cast<double>(total);
        grey_sum += static_cast<double>(it->second.grey) / static_cast<double>(total);
      }
      s.total_requests += total;
    }
    if (defined_days > 0) {
      s.mean_malicious_proportion = mal_sum / static_cast<double>(defined_days);
      s.mean_grey_proportion = grey_sum / static_cast<double>(defined_days);
    }
    report.summaries[group] = s;
  }
  return report;
}

}  // namespace dnsward::analytics
