#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "evtv/errors.hpp"
#include "evtv/evalue.hpp"
#include "oracles.hpp"

namespace evtv {
namespace {

using testing::curve_partner_by_bisection;
using testing::evalue_by_bisection;

// ---------------------------------------------------------------------------
// bias_factor

TEST(BiasFactor, PairedWithOneIsNoBias) { EXPECT_DOUBLE_EQ(bias_factor({1.0, 7.3}).value, 1.0); }

TEST(BiasFactor, EqualPairs) {
  EXPECT_NEAR(bias_factor({1.5, 1.5}).value, 1.125, 1e-15);
  // 2.02^2 / (2 * 2.02 - 1)
  EXPECT_NEAR(bias_factor({2.02, 2.02}).value, 4.0804 / 3.04, 1e-15);
  EXPECT_NEAR(bias_factor({2.02, 2.02}).value, 1.3422, 5e-5);
}

TEST(BiasFactor, BoundedByWeakerStrength) {
  const auto b = bias_factor({1.8, 4.0}).value;
  EXPECT_GE(b, 1.0);
  EXPECT_LE(b, 1.8);
}

TEST(BiasFactor, RejectsStrengthBelowOne) {
  EXPECT_THROW(bias_factor({0.9, 2.0}), DomainError);
  EXPECT_THROW(bias_factor({2.0, 0.5}), DomainError);
  EXPECT_THROW(bias_factor({std::nan(""), 2.0}), DomainError);
}

// ---------------------------------------------------------------------------
// evalue_from_rr

TEST(EValue, SimulationPointEstimate) { EXPECT_NEAR(evalue_from_rr(1.73), 2.85, 0.005); }

TEST(EValue, SimulationLowerLimit) { EXPECT_NEAR(evalue_from_rr(1.52), 2.41, 0.005); }

TEST(EValue, NullNeedsNoConfounding) { EXPECT_DOUBLE_EQ(evalue_from_rr(1.0), 1.0); }

TEST(EValue, AgreesWithBisectionOracle) {
  for (double rr : {1.0001, 1.07, 1.375, 1.73, 3.0, 25.0}) {
    EXPECT_NEAR(evalue_from_rr(rr), evalue_by_bisection(rr), 1e-10) << rr;
  }
}

TEST(EValue, FloatingNoiseBelowNullIsSnapped) {
  EXPECT_DOUBLE_EQ(evalue_from_rr(1.0 - 1e-14), 1.0);
  EXPECT_THROW(evalue_from_rr(0.999), DomainError);
}

// ---------------------------------------------------------------------------
// equal_split_evalue

TEST(EqualSplit, SimulationTwoTimepoints) { EXPECT_NEAR(equal_split_evalue(1.73, 2), 1.96, 0.005); }

TEST(EqualSplit, RealDataTwoTimepoints) { EXPECT_NEAR(equal_split_evalue(1.375, 2), 1.63, 0.01); }

TEST(EqualSplit, SingleTimepointReduces) {
  for (double rr : {1.0, 1.2, 1.73, 4.5}) EXPECT_DOUBLE_EQ(equal_split_evalue(rr, 1), evalue_from_rr(rr));
}

TEST(EqualSplit, RejectsBadInput) {
  EXPECT_THROW(equal_split_evalue(1.5, 0), DomainError);
  EXPECT_THROW(equal_split_evalue(0.5, 2), DomainError);
}

// ---------------------------------------------------------------------------
// residual_evalue

TEST(ResidualEValue, BaselineStrengthOnePointFive) {
  EXPECT_NEAR(residual_evalue(1.73, {1.125}), 2.44, 0.01);
  EXPECT_NEAR(residual_evalue(1.73, {1.125}), curve_partner_by_bisection(1.73, 1.5), 1e-10);
}

TEST(ResidualEValue, Endpoints) {
  EXPECT_DOUBLE_EQ(residual_evalue(1.73, {1.0}), evalue_from_rr(1.73));
  EXPECT_DOUBLE_EQ(residual_evalue(1.73, {1.73}), 1.0);
}

TEST(ResidualEValue, OverAttributionIsAnError) {
  EXPECT_THROW(residual_evalue(1.73, {1.8}), DomainError);
  EXPECT_THROW(residual_evalue(1.73, {0.9}), DomainError);
}

// ---------------------------------------------------------------------------
// tradeoff_curve

// Time-1 strength for an exact time-0 strength (the grid may not hit it).
double partner(double rr, double s0) { return residual_evalue(rr, bias_factor(ConfounderStrength::equal(s0))); }

TEST(TradeoffCurve, PublishedExamples) {
  EXPECT_NEAR(partner(1.73, 1.50), 2.44, 0.01);
  EXPECT_NEAR(partner(1.52, 1.40), 2.13, 0.015);
  EXPECT_NEAR(partner(1.52, 1.40), curve_partner_by_bisection(1.52, 1.40), 1e-10);
}

TEST(TradeoffCurve, GridPointsMatchOracle) {
  const auto curve = tradeoff_curve(1.73, 57);
  ASSERT_EQ(curve.size(), 57u);
  for (const auto& p : curve) {
    EXPECT_NEAR(p.strength_t1, curve_partner_by_bisection(1.73, p.strength_t0), 1e-9);
    EXPECT_NEAR(p.b0 * p.b1, 1.73, 1.73e-9);
  }
}

TEST(TradeoffCurve, Endpoints) {
  const auto curve = tradeoff_curve(1.73, 200);
  const double e = evalue_from_rr(1.73);
  EXPECT_DOUBLE_EQ(curve.front().strength_t0, 1.0);
  EXPECT_DOUBLE_EQ(curve.front().strength_t1, e);
  EXPECT_DOUBLE_EQ(curve.back().strength_t0, e);
  EXPECT_DOUBLE_EQ(curve.back().strength_t1, 1.0);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_GT(curve[i].strength_t0, curve[i - 1].strength_t0);
    EXPECT_LT(curve[i].strength_t1, curve[i - 1].strength_t1);
  }
}

TEST(TradeoffCurve, NullTargetIsDegenerate) {
  for (const auto& p : tradeoff_curve(1.0, 10)) {
    EXPECT_DOUBLE_EQ(p.strength_t0, 1.0);
    EXPECT_DOUBLE_EQ(p.strength_t1, 1.0);
  }
}

TEST(TradeoffCurve, RejectsBadInput) {
  EXPECT_THROW(tradeoff_curve(0.8, 10), DomainError);
  EXPECT_THROW(tradeoff_curve(1.5, 1), DomainError);
}

// ---------------------------------------------------------------------------
// combined_bias / adjusted_rr

TEST(CombinedBias, EqualSplitRecoversObserved) {
  const std::vector<ConfounderStrength> s{{1.96, 1.96}, {1.96, 1.96}};
  EXPECT_NEAR(combined_bias(s).value, 1.73, 0.005);
}

TEST(CombinedBias, ProductOfFactors) {
  const std::vector<ConfounderStrength> s{{1.0, 1.0}, {3.0, 3.0}};
  EXPECT_NEAR(combined_bias(s).value, 1.8, 1e-15);
  const std::vector<ConfounderStrength> single{{1.0, 1.0}};
  EXPECT_DOUBLE_EQ(combined_bias(single).value, 1.0);
}

TEST(CombinedBias, EmptyAndInvalid) {
  EXPECT_THROW(combined_bias({}), DomainError);
  const std::vector<ConfounderStrength> bad{{1.2, 1.2}, {0.5, 2.0}};
  EXPECT_THROW(combined_bias(bad), DomainError);
}

TEST(AdjustedRr, Nullification) {
  EXPECT_DOUBLE_EQ(adjusted_rr(1.73, {1.73}), 1.0);
  EXPECT_DOUBLE_EQ(adjusted_rr(1.73, {1.0}), 1.73);
  const double e = equal_split_evalue(1.73, 2);
  const std::vector<ConfounderStrength> s{ConfounderStrength::equal(e), ConfounderStrength::equal(e)};
  EXPECT_NEAR(adjusted_rr(1.73, combined_bias(s)), 1.0, 1e-12);
  EXPECT_THROW(adjusted_rr(0.0, {1.2}), DomainError);
}

// ---------------------------------------------------------------------------
// normalize_estimate

TEST(Normalize, RareOddsRatioUsedDirectly) {
  const auto n = normalize_estimate({Measure::OR, 1.38, 1.07, 1.77, true});
  EXPECT_DOUBLE_EQ(n.rr, 1.38);
  EXPECT_DOUBLE_EQ(*n.ci_limit_rr, 1.07);
  EXPECT_FALSE(n.inverted);
  EXPECT_FALSE(n.ci_crosses_null);
}

TEST(Normalize, CommonOddsRatioSquareRoot) {
  const auto n = normalize_estimate({Measure::OR, 2.25, std::nullopt, std::nullopt, false});
  EXPECT_DOUBLE_EQ(n.rr, 1.5);
  EXPECT_FALSE(n.ci_limit_rr.has_value());
}

TEST(Normalize, PreventiveEstimateInverted) {
  const auto n = normalize_estimate({Measure::RR, 0.5, 0.4, 0.8, false});
  EXPECT_DOUBLE_EQ(n.rr, 2.0);
  EXPECT_DOUBLE_EQ(*n.ci_limit_rr, 1.25);
  EXPECT_TRUE(n.inverted);
}

TEST(Normalize, CiContainingNull) {
  const auto n = normalize_estimate({Measure::RR, 1.1, 0.9, 1.4, false});
  EXPECT_TRUE(n.ci_crosses_null);
  EXPECT_DOUBLE_EQ(ci_evalue(n, 2, Scenario::EqualSplit), 1.0);
  EXPECT_DOUBLE_EQ(ci_evalue(n, 2, Scenario::SingleTimepoint), 1.0);
}

TEST(Normalize, ExactNullLimit) {
  const auto n = normalize_estimate({Measure::RR, 1.5, 1.0, 2.0, false});
  EXPECT_DOUBLE_EQ(ci_evalue(n, 1, Scenario::SingleTimepoint), 1.0);
}

TEST(Normalize, HazardRatioCommonOutcome) {
  // Exponent form: (1 - 0.5^sqrt(HR)) / (1 - 0.5^sqrt(1/HR)).
  const double hr = 4.0;
  const double expected = (1.0 - std::pow(0.5, 2.0)) / (1.0 - std::pow(0.5, 0.5));
  EXPECT_NEAR(hr_to_rr(hr), expected, 1e-14);
  EXPECT_GT(hr_to_rr(hr), 1.0);
  EXPECT_DOUBLE_EQ(hr_to_rr(1.0), 1.0);
  EXPECT_NEAR(hr_to_rr(0.5) * hr_to_rr(2.0), 1.0, 1e-14);
  const auto n = normalize_estimate({Measure::HR, 4.0, std::nullopt, std::nullopt, false});
  EXPECT_NEAR(n.rr, expected, 1e-14);
  const auto rare = normalize_estimate({Measure::HR, 4.0, std::nullopt, std::nullopt, true});
  EXPECT_DOUBLE_EQ(rare.rr, 4.0);
}

TEST(Normalize, HazardRatioMonotone) {
  double prev = 0.0;
  for (double hr = 0.1; hr < 20.0; hr *= 1.3) {
    const double rr = hr_to_rr(hr);
    EXPECT_GT(rr, prev);
    prev = rr;
  }
}

TEST(Normalize, InvalidInputs) {
  EXPECT_THROW(normalize_estimate({Measure::RR, 0.0, std::nullopt, std::nullopt, false}), DomainError);
  EXPECT_THROW(normalize_estimate({Measure::RR, 1.5, 1.6, 2.0, false}), DomainError);
  EXPECT_THROW(normalize_estimate({Measure::RR, 1.5, -1.0, 2.0, false}), DomainError);
  EXPECT_THROW(normalize_estimate({Measure::RR, 1.5, 1.2, std::nullopt, false}), DomainError);
}

TEST(Normalize, IdempotentOnNormalizedRiskRatio) {
  const auto once = normalize_estimate({Measure::OR, 0.6, 0.45, 0.8, false});
  const auto twice = normalize_estimate({Measure::RR, once.rr, *once.ci_limit_rr, once.rr * 1.5, false});
  EXPECT_DOUBLE_EQ(twice.rr, once.rr);
  EXPECT_DOUBLE_EQ(*twice.ci_limit_rr, *once.ci_limit_rr);
  EXPECT_FALSE(twice.inverted);
}

// ---------------------------------------------------------------------------
// ci_evalue

TEST(CiEValue, SimulationEqualSplit) {
  const auto n = normalize_estimate({Measure::RR, 1.73, 1.52, 1.99, false});
  EXPECT_NEAR(ci_evalue(n, 2, Scenario::EqualSplit), 1.77, 0.005);
  EXPECT_NEAR(ci_evalue(n, 2, Scenario::SingleTimepoint), 2.41, 0.005);
}

TEST(CiEValue, RealDataSingleTimepoint) {
  const auto n = normalize_estimate({Measure::OR, 1.38, 1.07, 1.77, true});
  EXPECT_NEAR(ci_evalue(n, 2, Scenario::SingleTimepoint), 1.34, 0.01);
  // Reported as "around 1.23"; the formula gives 1.223.
  EXPECT_NEAR(ci_evalue(n, 2, Scenario::EqualSplit), 1.23, 0.015);
}

TEST(CiEValue, RequiresInterval) {
  const auto n = normalize_estimate({Measure::RR, 1.73, std::nullopt, std::nullopt, false});
  EXPECT_THROW(ci_evalue(n, 2, Scenario::EqualSplit), DomainError);
}

// ---------------------------------------------------------------------------
// build_report

TEST(BuildReport, SimulationResults) {
  const auto r = build_report({Measure::RR, 1.73, 1.52, 1.99, false}, 2);
  EXPECT_NEAR(r.evalue_equal_split, 1.96, 0.005);
  EXPECT_NEAR(r.evalue_single_timepoint, 2.85, 0.005);
  EXPECT_NEAR(*r.ci_evalue_equal_split, 1.77, 0.005);
  EXPECT_NEAR(*r.ci_evalue_single_timepoint, 2.41, 0.005);
  EXPECT_TRUE(r.curve.empty());
}

TEST(BuildReport, RealDataApplication) {
  for (double or_value : {1.375, 1.38}) {
    const auto r = build_report({Measure::OR, or_value, 1.07, 1.77, true}, 2);
    EXPECT_NEAR(r.evalue_equal_split, 1.63, 0.02) << or_value;
    EXPECT_GE(r.evalue_single_timepoint, 2.09);
    EXPECT_LE(r.evalue_single_timepoint, 2.11);
    EXPECT_NEAR(*r.ci_evalue_single_timepoint, 1.34, 0.01);
  }
}

TEST(BuildReport, NullEstimate) {
  const auto r = build_report({Measure::RR, 1.0, std::nullopt, std::nullopt, false}, 3);
  EXPECT_DOUBLE_EQ(r.evalue_equal_split, 1.0);
  EXPECT_DOUBLE_EQ(r.evalue_single_timepoint, 1.0);
}

TEST(BuildReport, CurveOnlyForTwoTimepoints) {
  EXPECT_EQ(build_report({Measure::RR, 1.73, 1.52, 1.99, false}, 2, 50).curve.size(), 50u);
  EXPECT_EQ(build_report({Measure::RR, 1.73, 1.52, 1.99, false}, 2, 50).ci_curve.size(), 50u);
  EXPECT_TRUE(build_report({Measure::RR, 1.73, 1.52, 1.99, false}, 3, 50).curve.empty());
  EXPECT_TRUE(build_report({Measure::RR, 1.73, 1.52, 1.99, false}, 2, 1).curve.empty());
}

TEST(BuildReport, PropagatesErrors) {
  EXPECT_THROW(build_report({Measure::RR, 1.73, std::nullopt, std::nullopt, false}, 0), DomainError);
  EXPECT_THROW(build_report({Measure::RR, -2.0, std::nullopt, std::nullopt, false}, 2), DomainError);
}

TEST(Measure, ParseIsCaseInsensitive) {
  EXPECT_EQ(parse_measure("Or"), Measure::OR);
  EXPECT_EQ(parse_measure("HR"), Measure::HR);
  EXPECT_FALSE(parse_measure("rd").has_value());
}

}  // namespace
}  // namespace evtv
