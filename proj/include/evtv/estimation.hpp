#pragma once

// Inverse-probability-weighted marginal structural model for two treatment
// times (L0 -> A0 -> L1 -> A1 -> Y), plus a percentile bootstrap.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace evtv {

struct CohortRecord {
  std::uint8_t l0 = 0;
  std::uint8_t a0 = 0;
  std::uint8_t l1 = 0;
  std::uint8_t a1 = 0;
  std::uint8_t y = 0;

  friend bool operator==(const CohortRecord&, const CohortRecord&) = default;
};

using Cohort = std::vector<CohortRecord>;

struct WeightOptions {
  // Fitted treatment probabilities (of either level) below this are
  // positivity violations.
  double positivity_floor = 1e-6;
  // Clamp weights to the [q, 1 - q] percentiles when set. Off by default.
  std::optional<double> truncate_quantile;
};

struct MsmResult {
  double rr_obs = 1.0;
  double p11 = 0.0;
  double p00 = 0.0;
  double weight_mean = 1.0;
  double weight_max = 1.0;
  std::optional<double> ci_lower;
  std::optional<double> ci_upper;
  std::vector<double> coefficients;  // intercept, A0, A1
  bool separation = false;
  std::vector<std::string> warnings;
};

// Per-subject SW = P(A0=a0)/P(A0=a0|L0) * P(A1=a1|A0)/P(A1=a1|A0,L0,L1).
// Throws PositivityViolation when a treatment arm is missing or a fitted
// treatment probability falls below the floor.
std::vector<double> stabilized_weights(std::span<const CohortRecord> cohort,
                                       const WeightOptions& options = {});

// Weighted fit of logit P(Y=1|A0,A1) = a0 + a1 A0 + a2 A1, read off at the
// always-treated and never-treated regimes.
MsmResult fit_msm(std::span<const CohortRecord> cohort, std::span<const double> weights);

// stabilized_weights followed by fit_msm.
MsmResult estimate_msm(std::span<const CohortRecord> cohort, const WeightOptions& options = {});

struct BootstrapOptions {
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  double max_failure_fraction = 0.10;
  unsigned threads = 0;  // 0 = hardware concurrency
  WeightOptions weights;
};

struct BootstrapResult {
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  std::size_t successful = 0;
  std::size_t failed = 0;
};

// Percentile interval (2.5%, 97.5%) of rr_obs over resampled cohorts.
// Replicate k draws from its own stream derived from (seed, k), so the result
// does not depend on thread scheduling. Throws BootstrapFailure when more than
// max_failure_fraction of the replicates hit positivity or separation.
BootstrapResult bootstrap_ci(std::span<const CohortRecord> cohort, const BootstrapOptions& options);

// Linear-interpolation sample quantile (R type 7) of sorted data.
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace evtv
