#include "dnsward/intervention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "dnsward/rng.hpp"

namespace dnsward::its {

std::string_view to_string(Metric m) {
  return m == Metric::MaliciousProportion ? "malicious_proportion" : "grey_proportion";
}

std::optional<Metric> parse_metric(std::string_view s) {
  if (s == "malicious" || s == "malicious_proportion") return Metric::MaliciousProportion;
  if (s == "grey" || s == "grey_proportion") return Metric::GreyProportion;
  return std::nullopt;
}

void validate(const ItsConfig& cfg) {
  if (cfg.pre_window < 14) fail("CONFIG_INVALID", "pre_window must be >= 14 days");
  if (cfg.post_window < 7) fail("CONFIG_INVALID", "post_window must be >= 7 days");
  if (cfg.n_permutations < 100) fail("CONFIG_INVALID", "n_permutations must be >= 100");
  if (cfg.alpha <= 0.0 || cfg.alpha >= 1.0) fail("CONFIG_INVALID", "alpha must be in (0,1)");
}

namespace {

constexpr size_t kMinDefinedPre = 14;

// Dense lookup: day -> defined value.
std::map<int32_t, double> indexed(const std::vector<analytics::ProportionPoint>& series) {
  std::map<int32_t, double> out;
  for (const auto& p : series) {
    if (p.defined) out[p.date.days()] = p.value;
  }
  return out;
}

struct Row {
  Date date;
  double y = 0.0;
  double control = 0.0;
  bool has_control = false;
};

// Least squares via normal equations with partial pivoting; near-zero
// pivots drop the offending column (collinear regressors).
struct Ols {
  std::vector<std::string> names;            // per kept column
  std::vector<double> beta;                  // per kept column
  std::vector<double> stderrs;               // per kept column
  std::vector<std::vector<double>> xtx_inv;  // for std errors
  bool ok = false;
};

Ols solve_ols(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
              const std::vector<std::string>& names) {
  const size_t n = X.size();
  const size_t k = names.size();
  Ols out;
  out.names = names;
  if (n == 0 || k == 0 || n < k) return out;

  // XtX and Xty
  std::vector<std::vector<double>> a(k, std::vector<double>(k, 0.0));
  std::vector<double> b(k, 0.0);
  for (size_t r = 0; r < n; ++r) {
    for (size_t i = 0; i < k; ++i) {
      b[i] += X[r][i] * y[r];
      for (size_t j = i; j < k; ++j) a[i][j] += X[r][i] * X[r][j];
    }
  }
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < i; ++j) a[i][j] = a[j][i];
  }

  // Gauss-Jordan with the augmented identity to get the inverse alongside
  std::vector<std::vector<double>> m(k, std::vector<double>(2 * k, 0.0));
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < k; ++j) m[i][j] = a[i][j];
    m[i][k + i] = 1.0;
  }
  double scale = 0.0;
  for (size_t i = 0; i < k; ++i) scale = std::max(scale, std::abs(a[i][i]));
  if (scale <= 0.0) return out;
  const double tiny = scale * 1e-12;

  for (size_t col = 0; col < k; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < k; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (std::abs(m[pivot][col]) < tiny) return out;  // singular: caller drops columns
    std::swap(m[col], m[pivot]);
    const double d = m[col][col];
    for (size_t j = 0; j < 2 * k; ++j) m[col][j] /= d;
    for (size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = m[r][col];
      if (f == 0.0) continue;
      for (size_t j = 0; j < 2 * k; ++j) m[r][j] -= f * m[col][j];
    }
  }

  std::vector<std::vector<double>> inv(k, std::vector<double>(k));
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < k; ++j) inv[i][j] = m[i][k + j];
  }
  std::vector<double> beta(k, 0.0);
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < k; ++j) beta[i] += inv[i][j] * b[j];
  }

  double rss = 0.0;
  for (size_t r = 0; r < n; ++r) {
    double pred = 0.0;
    for (size_t i = 0; i < k; ++i) pred += X[r][i] * beta[i];
    const double e = y[r] - pred;
    rss += e * e;
  }
  const double dof = static_cast<double>(n > k ? n - k : 1);
  const double s2 = rss / dof;
  std::vector<double> stderrs(k, 0.0);
  for (size_t i = 0; i < k; ++i) {
    stderrs[i] = std::sqrt(std::max(0.0, s2 * inv[i][i]));
  }

  out.beta = std::move(beta);
  out.stderrs = std::move(stderrs);
  out.xtx_inv = std::move(inv);
  out.ok = true;
  return out;
}

}  // namespace

FitResult fit_counterfactual(const std::vector<analytics::ProportionPoint>& treated,
                             const std::vector<analytics::ProportionPoint>& control,
                             Date intervention_date, const ItsConfig& cfg) {
  validate(cfg);
  const auto y_by_day = indexed(treated);
  const auto c_by_day = indexed(control);
  const bool use_control = cfg.use_control_covariate && !c_by_day.empty();

  const auto collect = [&](Date from, Date to) {
    std::vector<Row> rows;
    for (Date d = from; d < to; ++d) {
      const auto y = y_by_day.find(d.days());
      if (y == y_by_day.end()) continue;
      Row row;
      row.date = d;
      row.y = y->second;
      if (use_control) {
        const auto c = c_by_day.find(d.days());
        if (c == c_by_day.end()) continue;  // pairwise exclusion
        row.control = c->second;
        row.has_control = true;
      }
      rows.push_back(row);
    }
    return rows;
  };

  const std::vector<Row> pre = collect(intervention_date - cfg.pre_window, intervention_date);
  const std::vector<Row> post =
      collect(intervention_date, intervention_date + cfg.post_window);

  if (pre.size() < kMinDefinedPre) {
    fail("INSUFFICIENT_DATA", "only " + std::to_string(pre.size()) +
                                  " defined pre-window days; need >= " +
                                  std::to_string(kMinDefinedPre));
  }
  if (post.empty()) {
    fail("INSUFFICIENT_DATA", "no defined days in the post window");
  }

  // candidate columns: intercept, control, weekday dummies (Mon..Sat)
  struct Column {
    std::string name;
    std::function<double(const Row&)> value;
  };
  std::vector<Column> candidates;
  candidates.push_back({"intercept", [](const Row&) { return 1.0; }});
  if (use_control) {
    candidates.push_back({"control", [](const Row& r) { return r.control; }});
  }
  if (cfg.weekday_dummies) {
    static const char* names[6] = {"mon", "tue", "wed", "thu", "fri", "sat"};
    for (int wd = 0; wd < 6; ++wd) {
      candidates.push_back({names[wd], [wd](const Row& r) {
                              return r.date.weekday() == wd ? 1.0 : 0.0;
                            }});
    }
  }

  // drop zero-variance columns (intercept excepted)
  std::vector<Column> kept;
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (i == 0) {
      kept.push_back(candidates[i]);
      continue;
    }
    const double first = candidates[i].value(pre[0]);
    bool varies = false;
    for (const auto& row : pre) {
      if (candidates[i].value(row) != first) {
        varies = true;
        break;
      }
    }
    if (varies) kept.push_back(candidates[i]);
  }

  FitResult fit;
  fit.n_pre_used = pre.size();
  fit.degenerate = kept.size() == 1;  // mean model

  // assemble and solve; on a singular system drop the last non-intercept
  // column and retry (collinearity paths are rare and data-dependent)
  for (;;) {
    std::vector<std::vector<double>> X(pre.size(), std::vector<double>(kept.size()));
    std::vector<double> y(pre.size());
    std::vector<std::string> names;
    for (const auto& c : kept) names.push_back(c.name);
    for (size_t r = 0; r < pre.size(); ++r) {
      y[r] = pre[r].y;
      for (size_t i = 0; i < kept.size(); ++i) X[r][i] = kept[i].value(pre[r]);
    }
    const Ols ols = solve_ols(X, y, names);
    if (ols.ok) {
      fit.coef_names = ols.names;
      fit.coefficients = ols.beta;
      fit.std_errors = ols.stderrs;
      break;
    }
    if (kept.size() <= 1) {
      // all-zero data: fall back to the mean of y
      double mean = 0.0;
      for (const auto& row : pre) mean += row.y;
      mean /= static_cast<double>(pre.size());
      fit.coef_names = {"intercept"};
      fit.coefficients = {mean};
      fit.std_errors = {0.0};
      fit.degenerate = true;
      break;
    }
    kept.pop_back();
    if (kept.size() == 1) fit.degenerate = true;
  }

  for (const auto& row : post) {
    double pred = 0.0;
    for (size_t i = 0; i < fit.coef_names.size(); ++i) {
      double x = 0.0;
      if (fit.coef_names[i] == "intercept") {
        x = 1.0;
      } else if (fit.coef_names[i] == "control") {
        x = row.control;
      } else {
        static const std::map<std::string, int> wd = {{"mon", 0}, {"tue", 1}, {"wed", 2},
                                                      {"thu", 3}, {"fri", 4}, {"sat", 5}};
        const auto it = wd.find(fit.coef_names[i]);
        if (it != wd.end()) x = row.date.weekday() == it->second ? 1.0 : 0.0;
      }
      pred += fit.coefficients[i] * x;
    }
    fit.post.push_back({row.date, row.y, pred});
  }
  return fit;
}

namespace {

double effect_of(const FitResult& fit) {
  double sum = 0.0;
  for (const auto& p : fit.post) sum += p.actual - p.predicted;
  return sum / static_cast<double>(fit.post.size());
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  if (sorted.size() == 1) return sorted[0];
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

EffectEstimate estimate_effect(const std::vector<analytics::ProportionPoint>& treated,
                               const std::vector<analytics::ProportionPoint>& control,
                               Date intervention_date, const ItsConfig& cfg) {
  validate(cfg);
  EffectEstimate est;

  const FitResult fit = fit_counterfactual(treated, control, intervention_date, cfg);
  est.effect = effect_of(fit);
  est.n_defined_days_pre = fit.n_pre_used;
  est.n_defined_days_post = fit.post.size();
  est.degenerate_fit = fit.degenerate;

  double cf_mean = 0.0;
  for (const auto& p : fit.post) cf_mean += p.predicted;
  cf_mean /= static_cast<double>(fit.post.size());
  est.relative_effect = std::abs(cf_mean) > 1e-300
                            ? est.effect / cf_mean
                            : std::numeric_limits<double>::quiet_NaN();

  // placebo dates: both windows must fit strictly inside the pre-period
  std::optional<Date> first_defined;
  for (const auto& p : treated) {
    if (p.defined && (!first_defined || p.date < *first_defined)) first_defined = p.date;
  }
  const Date lo = *first_defined + cfg.pre_window;
  const Date hi = intervention_date - cfg.post_window;
  if (lo > hi) {
    fail("TOO_FEW_PLACEBOS", "pre-period too short to place any placebo date");
  }
  const int64_t n_distinct = hi - lo + 1;
  if (n_distinct < 100) {
    est.warnings.push_back("only " + std::to_string(n_distinct) +
                           " distinct placebo dates; sampling with replacement");
  }

  Rng rng(cfg.rng_seed);
  est.placebo_effects.reserve(static_cast<size_t>(cfg.n_permutations));
  for (int i = 0; i < cfg.n_permutations; ++i) {
    const Date placebo = lo + static_cast<int>(rng.uniform_u64(static_cast<uint64_t>(n_distinct)));
    try {
      const FitResult pf = fit_counterfactual(treated, control, placebo, cfg);
      est.placebo_effects.push_back(effect_of(pf));
    } catch (const Error&) {
      // sparse data at this placebo date: skip
    }
  }
  est.n_placebos = est.placebo_effects.size();
  if (est.n_placebos == 0) {
    fail("TOO_FEW_PLACEBOS", "no placebo date produced a fit");
  }
  std::sort(est.placebo_effects.begin(), est.placebo_effects.end());

  size_t at_least = 0;
  for (const double p : est.placebo_effects) {
    if (std::abs(p) >= std::abs(est.effect)) ++at_least;
  }
  est.p_value = static_cast<double>(at_least) / static_cast<double>(est.n_placebos);

  est.ci_low = est.effect - quantile(est.placebo_effects, 0.975);
  est.ci_high = est.effect - quantile(est.placebo_effects, 0.025);
  // the interval always covers the point estimate
  est.ci_low = std::min(est.ci_low, est.effect);
  est.ci_high = std::max(est.ci_high, est.effect);
  return est;
}

// Power analysis -----------------------------------------------------------------

double expected_proportion(const synth::SynthProfile& profile, Metric metric,
                           double multiplier) {
  double benign = 0.0, grey = 0.0, malicious = 0.0;
  for (const auto& w : profile.benign_pool) benign += std::max(0.0, w.weight);
  for (const auto& w : profile.grey_pool) grey += std::max(0.0, w.weight);
  for (const auto& w : profile.malicious_pool) malicious += std::max(0.0, w.weight);

  double sum = 0.0;
  for (uint32_t u = 0; u < profile.n_users; ++u) {
    double eg = 1.0, em = 1.0;
    for (const auto& egg : profile.bad_eggs) {
      if (egg.user_index == u) {
        eg = egg.grey_multiplier;
        em = egg.malicious_multiplier;
      }
    }
    const double g = grey * eg * (metric == Metric::GreyProportion ? multiplier : 1.0);
    const double m =
        malicious * em * (metric == Metric::MaliciousProportion ? multiplier : 1.0);
    const double total = benign + g + m;
    if (total <= 0.0) continue;
    sum += (metric == Metric::GreyProportion ? g : m) / total;
  }
  return profile.n_users ? sum / static_cast<double>(profile.n_users) : 0.0;
}

PowerReport power_analysis(const PowerSetup& setup, const std::vector<double>& effect_grid,
                           size_t n_trials, const ItsConfig& cfg, uint64_t seed) {
  validate(cfg);
  if (n_trials < 20) fail("CONFIG_INVALID", "power analysis needs >= 20 trials");
  if (effect_grid.empty()) fail("CONFIG_INVALID", "empty effect grid");

  PowerReport report;
  for (size_t gi = 0; gi < effect_grid.size(); ++gi) {
    const double multiplier = effect_grid[gi];
    PowerRow row;
    row.multiplier = multiplier;
    row.trials = n_trials;
    row.true_effect = expected_proportion(setup.treated, cfg.metric, multiplier) -
                      expected_proportion(setup.treated, cfg.metric, 1.0);

    size_t detected = 0;
    double effect_sum = 0.0;
    for (size_t t = 0; t < n_trials; ++t) {
      const uint64_t trial_seed = mix_seed(mix_seed(seed, gi), t);

      synth::SynthProfile treated = setup.treated;
      synth::InterventionEffect effect;
      effect.date = setup.intervention_date;
      if (cfg.metric == Metric::GreyProportion) effect.grey_multiplier = multiplier;
      else effect.malicious_multiplier = multiplier;
      treated.intervention = effect;

      analytics::Aggregator agg;
      synth::generate({treated, setup.control}, setup.from, setup.to, trial_seed,
                      [&](const qlog::QueryRecord& r) { agg.add(r); });
      const auto aggs = agg.finish();

      const TrafficClass cls = cfg.metric == Metric::GreyProportion
                                   ? TrafficClass::Grey
                                   : TrafficClass::Malicious;
      const auto series = analytics::proportion_series(aggs, cls, analytics::Scope::Org, {});
      const auto treated_series = analytics::filter_scope(series, treated.org_id);
      const auto control_series = analytics::filter_scope(series, setup.control.org_id);

      ItsConfig trial_cfg = cfg;
      trial_cfg.rng_seed = mix_seed(trial_seed, "its");
      const EffectEstimate est = estimate_effect(treated_series, control_series,
                                                 setup.intervention_date, trial_cfg);
      if (est.p_value < cfg.alpha) ++detected;
      effect_sum += est.effect;
    }
    row.detection_rate = static_cast<double>(detected) / static_cast<double>(n_trials);
    row.mean_effect = effect_sum / static_cast<double>(n_trials);
    row.bias = row.mean_effect - row.true_effect;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace dnsward::its
