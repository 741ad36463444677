#pragma once

// Bias-factor algebra and E-values for longitudinal (time-varying) exposures.
//
// All quantities live on the risk-ratio scale. Estimates on the preventive
// side of the null (RR < 1) are inverted by normalize_estimate() before any
// E-value is computed, so every routine below expects rr >= 1.
//
// Everything in this header is a pure function of its arguments.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace evtv {

// Values closer to 1 than this are treated as exactly null (sqrt guard).
inline constexpr double kNullTolerance = 1e-12;

// Outcome prevalence below which OR and HR may be read directly as RR.
inline constexpr double kRareOutcomePrevalence = 0.15;

inline constexpr std::size_t kDefaultCurvePoints = 200;

// Association strengths of an unmeasured confounder at one time point:
// exposure <-> confounder and confounder <-> outcome, both >= 1.
struct ConfounderStrength {
  double rr_eu = 1.0;
  double rr_uy = 1.0;

  static ConfounderStrength equal(double strength) { return {strength, strength}; }

  friend bool operator==(const ConfounderStrength&, const ConfounderStrength&) = default;
};

// Maximum multiplicative distortion of a risk ratio; always >= 1.
struct BiasFactor {
  double value = 1.0;
};

enum class Measure { RR, OR, HR };

std::string_view to_string(Measure m);
std::optional<Measure> parse_measure(std::string_view text);

struct EffectEstimate {
  Measure measure = Measure::RR;
  double value = 1.0;
  std::optional<double> ci_lower;
  std::optional<double> ci_upper;
  // Caller-supplied: outcome prevalence below kRareOutcomePrevalence.
  bool outcome_rare = false;

  bool has_ci() const { return ci_lower.has_value() && ci_upper.has_value(); }

  friend bool operator==(const EffectEstimate&, const EffectEstimate&) = default;
};

struct NormalizedEstimate {
  double rr = 1.0;
  // Transformed confidence limit closest to the null; 1 when the interval
  // contains the null.
  std::optional<double> ci_limit_rr;
  bool inverted = false;
  bool ci_crosses_null = false;

  friend bool operator==(const NormalizedEstimate&, const NormalizedEstimate&) = default;
};

enum class Scenario { EqualSplit, SingleTimepoint };

struct TradeoffPoint {
  double strength_t0 = 1.0;
  double strength_t1 = 1.0;
  double b0 = 1.0;
  double b1 = 1.0;

  friend bool operator==(const TradeoffPoint&, const TradeoffPoint&) = default;
};

struct EValueReport {
  EffectEstimate input;
  NormalizedEstimate normalized;
  int timepoints = 1;
  double evalue_equal_split = 1.0;
  double evalue_single_timepoint = 1.0;
  std::optional<double> ci_evalue_equal_split;
  std::optional<double> ci_evalue_single_timepoint;
  // Only populated for two time points.
  std::vector<TradeoffPoint> curve;
  std::vector<TradeoffPoint> ci_curve;

  friend bool operator==(const EValueReport&, const EValueReport&) = default;
};

// (rr_eu * rr_uy) / (rr_eu + rr_uy - 1). Throws DomainError if either
// strength is below 1.
BiasFactor bias_factor(const ConfounderStrength& s);

// rr + sqrt(rr (rr - 1)): the equal-pair strength whose bias factor is rr.
double evalue_from_rr(double rr);

// E-value per time point when the bias is spread evenly over `timepoints`.
double equal_split_evalue(double rr, int timepoints);

// E-value still required at time 1 once time 0 accounts for bias b0.
double residual_evalue(double rr_obs, BiasFactor b0);

// All (time 0, time 1) equal-pair strengths that jointly explain away
// rr_target, with strength_t0 on a uniform grid over [1, E(rr_target)].
std::vector<TradeoffPoint> tradeoff_curve(double rr_target,
                                          std::size_t n_points = kDefaultCurvePoints);

BiasFactor combined_bias(std::span<const ConfounderStrength> strengths);

double adjusted_rr(double rr_obs, BiasFactor b_total);

// Risk-ratio approximation for a hazard ratio with a common outcome.
double hr_to_rr(double hr);

// Map OR/HR to the risk-ratio scale, invert preventive estimates, and pick the
// confidence limit closest to the null.
NormalizedEstimate normalize_estimate(const EffectEstimate& e);

double point_evalue(const NormalizedEstimate& n, int timepoints, Scenario scenario);
double ci_evalue(const NormalizedEstimate& n, int timepoints, Scenario scenario);

// Aggregates every scenario. The curves are only filled for timepoints == 2
// and curve_points >= 2.
EValueReport build_report(const EffectEstimate& e, int timepoints, std::size_t curve_points = 0);

}  // namespace evtv
