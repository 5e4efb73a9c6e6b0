#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dnsward/analytics.hpp"
#include "dnsward/dates.hpp"
#include "dnsward/synth.hpp"

namespace dnsward::its {

enum class Metric { MaliciousProportion, GreyProportion };

std::string_view to_string(Metric m);
std::optional<Metric> parse_metric(std::string_view s);

// Interrupted-time-series configuration. The counterfactual is an OLS fit
// over the pre-window (intercept, optional control covariate, optional
// weekday dummies); inference is by placebo permutation of the intervention
// date, so results are deterministic given rng_seed.
struct ItsConfig {
  Metric metric = Metric::GreyProportion;
  int pre_window = 90;    // days, >= 14
  int post_window = 60;   // days, >= 7
  bool use_control_covariate = true;
  bool weekday_dummies = true;
  int n_permutations = 1000;  // >= 100
  double alpha = 0.05;
  uint64_t rng_seed = 1;
};

void validate(const ItsConfig& cfg);  // throws CONFIG_INVALID

struct FitResult {
  std::vector<std::string> coef_names;
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  bool degenerate = false;  // all regressors were constant: pre-window mean model
  size_t n_pre_used = 0;

  struct Prediction {
    Date date;
    double actual = 0.0;
    double predicted = 0.0;
  };
  std::vector<Prediction> post;  // defined post-window days, pairwise-complete
};

// Fits the pre-window model and predicts each defined post-window day.
// Days undefined in either series never contribute. Throws
// INSUFFICIENT_DATA when fewer than 14 defined pre days (or no post days).
FitResult fit_counterfactual(const std::vector<analytics::ProportionPoint>& treated,
                             const std::vector<analytics::ProportionPoint>& control,
                             Date intervention_date, const ItsConfig& cfg);

struct EffectEstimate {
  double effect = 0.0;           // mean(actual - counterfactual), proportion units
  double relative_effect = 0.0;  // effect / mean(counterfactual); NaN when undefined
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;  // fraction of placebos with |placebo| >= |effect|
  size_t n_defined_days_pre = 0;
  size_t n_defined_days_post = 0;
  bool degenerate_fit = false;
  size_t n_placebos = 0;
  std::vector<double> placebo_effects;  // sorted; the null distribution
  std::vector<std::string> warnings;
};

EffectEstimate estimate_effect(const std::vector<analytics::ProportionPoint>& treated,
                               const std::vector<analytics::ProportionPoint>& control,
                               Date intervention_date, const ItsConfig& cfg);

// Power harness: injects multiplicative post-intervention rate changes into
// a synthetic treated/control pair and measures detection behaviour.
struct PowerSetup {
  synth::SynthProfile treated;
  synth::SynthProfile control;
  Date from, to;
  Date intervention_date;
};

struct PowerRow {
  double multiplier = 1.0;
  size_t trials = 0;
  double detection_rate = 0.0;  // p < alpha
  double mean_effect = 0.0;
  double true_effect = 0.0;  // analytic, from the profile's pool weights
  double bias = 0.0;         // mean_effect - true_effect
};

struct PowerReport {
  std::vector<PowerRow> rows;
};

// Full factorial over effect_grid x n_trials; deterministic given seed.
PowerReport power_analysis(const PowerSetup& setup, const std::vector<double>& effect_grid,
                           size_t n_trials, const ItsConfig& cfg, uint64_t seed);

// Expected proportion of `metric` traffic for a profile after applying a
// multiplicative change to the metric's pool weight (1.0 = no change).
double expected_proportion(const synth::SynthProfile& profile, Metric metric,
                           double multiplier);

}  // namespace dnsward::its
