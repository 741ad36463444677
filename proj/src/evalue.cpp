#include "evtv/evalue.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "evtv/errors.hpp"

namespace evtv {

namespace {

void require_timepoints(int timepoints) {
  if (timepoints < 1) {
    throw DomainError("timepoints must be >= 1, got " + std::to_string(timepoints));
  }
}

// Accepts values a hair below 1 (floating-point noise) and snaps them to 1.
double require_rr_at_least_one(double rr, const char* what) {
  if (!std::isfinite(rr) || rr < 1.0 - kNullTolerance) {
    throw DomainError(std::string(what) + " must be a finite risk ratio >= 1, got " +
                      std::to_string(rr));
  }
  return std::max(rr, 1.0);
}

double require_positive(double v, const char* what) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw DomainError(std::string(what) + " must be positive and finite, got " +
                      std::to_string(v));
  }
  return v;
}

double to_risk_ratio(Measure m, double value, bool rare) {
  if (m == Measure::RR || rare) return value;
  if (m == Measure::OR) return std::sqrt(value);
  return hr_to_rr(value);
}

}  // namespace

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::RR: return "RR";
    case Measure::OR: return "OR";
    case Measure::HR: return "HR";
  }
  return "RR";
}

std::optional<Measure> parse_measure(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "rr") return Measure::RR;
  if (lower == "or") return Measure::OR;
  if (lower == "hr") return Measure::HR;
  return std::nullopt;
}

BiasFactor bias_factor(const ConfounderStrength& s) {
  const double eu = require_rr_at_least_one(s.rr_eu, "rr_eu");
  const double uy = require_rr_at_least_one(s.rr_uy, "rr_uy");
  return {eu * uy / (eu + uy - 1.0)};
}

double evalue_from_rr(double rr) {
  rr = require_rr_at_least_one(rr, "rr");
  return rr + std::sqrt(std::max(0.0, rr * (rr - 1.0)));
}

double equal_split_evalue(double rr, int timepoints) {
  require_timepoints(timepoints);
  rr = require_rr_at_least_one(rr, "rr");
  if (timepoints == 1) return evalue_from_rr(rr);
  return evalue_from_rr(std::pow(rr, 1.0 / timepoints));
}

double residual_evalue(double rr_obs, BiasFactor b0) {
  rr_obs = require_rr_at_least_one(rr_obs, "rr_obs");
  const double b = require_rr_at_least_one(b0.value, "b0");
  if (b > rr_obs * (1.0 + kNullTolerance)) {
    throw DomainError("bias factor at time 0 (" + std::to_string(b) +
                      ") exceeds the observed risk ratio (" + std::to_string(rr_obs) + ")");
  }
  // E(x) has unbounded slope at x = 1, so a ratio that is 1 up to rounding
  // in b must map to exactly 1.
  const double ratio = rr_obs / b;
  if (ratio <= 1.0 + 16.0 * std::numeric_limits<double>::epsilon()) return 1.0;
  return evalue_from_rr(ratio);
}

std::vector<TradeoffPoint> tradeoff_curve(double rr_target, std::size_t n_points) {
  rr_target = require_rr_at_least_one(rr_target, "rr_target");
  if (n_points < 2) throw DomainError("a trade-off curve needs at least 2 points");

  const double e_single = evalue_from_rr(rr_target);
  std::vector<TradeoffPoint> points;
  points.reserve(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    TradeoffPoint p;
    if (i == 0) {
      p = {1.0, e_single, 1.0, rr_target};
    } else if (i + 1 == n_points) {
      p = {e_single, 1.0, rr_target, 1.0};
    } else {
      const double frac = static_cast<double>(i) / static_cast<double>(n_points - 1);
      p.strength_t0 = 1.0 + (e_single - 1.0) * frac;
      p.b0 = bias_factor(ConfounderStrength::equal(p.strength_t0)).value;
      p.b1 = std::max(1.0, rr_target / p.b0);
      p.strength_t1 = evalue_from_rr(p.b1);
    }
    points.push_back(p);
  }
  return points;
}

BiasFactor combined_bias(std::span<const ConfounderStrength> strengths) {
  if (strengths.empty()) throw DomainError("combined_bias needs at least one time point");
  double total = 1.0;
  for (const auto& s : strengths) total *= bias_factor(s).value;
  return {total};
}

double adjusted_rr(double rr_obs, BiasFactor b_total) {
  require_positive(rr_obs, "rr_obs");
  require_rr_at_least_one(b_total.value, "b_total");
  return rr_obs / b_total.value;
}

// The exponent form (1 - 0.5^sqrt(HR)) / (1 - 0.5^sqrt(1/HR)). Reading the
// 0.5 as a multiplier instead degenerates at HR = 4.
double hr_to_rr(double hr) {
  require_positive(hr, "hazard ratio");
  if (hr == 1.0) return 1.0;
  const double num = -std::expm1(std::sqrt(hr) * std::log(0.5));
  const double den = -std::expm1(std::sqrt(1.0 / hr) * std::log(0.5));
  return num / den;
}

NormalizedEstimate normalize_estimate(const EffectEstimate& e) {
  require_positive(e.value, "estimate");
  if (e.ci_lower.has_value() != e.ci_upper.has_value()) {
    throw DomainError("confidence interval needs both a lower and an upper limit");
  }
  if (e.has_ci()) {
    require_positive(*e.ci_lower, "ci_lower");
    require_positive(*e.ci_upper, "ci_upper");
    if (!(*e.ci_lower <= e.value && e.value <= *e.ci_upper)) {
      throw DomainError("confidence interval must satisfy lower <= estimate <= upper");
    }
  }

  NormalizedEstimate n;
  n.rr = to_risk_ratio(e.measure, e.value, e.outcome_rare);
  if (n.rr < 1.0) {
    n.rr = 1.0 / n.rr;
    n.inverted = true;
  }
  if (e.has_ci()) {
    n.ci_crosses_null = *e.ci_lower <= 1.0 && 1.0 <= *e.ci_upper;
    if (n.ci_crosses_null) {
      n.ci_limit_rr = 1.0;
    } else {
      // Limit closest to the null: the upper one for preventive estimates.
      const double limit = n.inverted ? *e.ci_upper : *e.ci_lower;
      double rr_limit = to_risk_ratio(e.measure, limit, e.outcome_rare);
      if (n.inverted) rr_limit = 1.0 / rr_limit;
      n.ci_limit_rr = std::max(1.0, rr_limit);
    }
  }
  return n;
}

namespace {

double scenario_evalue(double rr, int timepoints, Scenario scenario) {
  return scenario == Scenario::EqualSplit ? equal_split_evalue(rr, timepoints)
                                          : evalue_from_rr(rr);
}

}  // namespace

double point_evalue(const NormalizedEstimate& n, int timepoints, Scenario scenario) {
  require_timepoints(timepoints);
  return scenario_evalue(n.rr, timepoints, scenario);
}

double ci_evalue(const NormalizedEstimate& n, int timepoints, Scenario scenario) {
  require_timepoints(timepoints);
  if (!n.ci_limit_rr) throw DomainError("estimate has no confidence interval");
  // Interval already contains the null: no confounding needed.
  if (n.ci_crosses_null || *n.ci_limit_rr <= 1.0) return 1.0;
  return scenario_evalue(*n.ci_limit_rr, timepoints, scenario);
}

EValueReport build_report(const EffectEstimate& e, int timepoints, std::size_t curve_points) {
  require_timepoints(timepoints);
  EValueReport r;
  r.input = e;
  r.normalized = normalize_estimate(e);
  r.timepoints = timepoints;
  r.evalue_equal_split = point_evalue(r.normalized, timepoints, Scenario::EqualSplit);
  r.evalue_single_timepoint = point_evalue(r.normalized, timepoints, Scenario::SingleTimepoint);
  if (r.normalized.ci_limit_rr) {
    r.ci_evalue_equal_split = ci_evalue(r.normalized, timepoints, Scenario::EqualSplit);
    r.ci_evalue_single_timepoint = ci_evalue(r.normalized, timepoints, Scenario::SingleTimepoint);
  }
  if (timepoints == 2 && curve_points >= 2) {
    r.curve = tradeoff_curve(r.normalized.rr, curve_points);
    if (r.normalized.ci_limit_rr) r.ci_curve = tradeoff_curve(*r.normalized.ci_limit_rr, curve_points);
  }
  return r;
}

}  // namespace evtv
