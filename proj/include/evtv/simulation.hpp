#pragma once

// Two-time-point data-generating process with unmeasured confounders U0, U1:
//
//   U0 ~ Bern(p_u0), L0 ~ Bern(p_l0)
//   A0 | L0, U0      logistic
//   U1 ~ Bern(p_u1)
//   L1 | A0, L0      logistic
//   A1 | A0, L1, U1  logistic
//   Y^{a0,a1}        logistic in (a0, a1, L0, L1, L0*L1, U0, U1)
//
// Potential outcomes use the realized L1, which depends on the subject's
// actual A0; observed Y = Y^{A0,A1}.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evtv/estimation.hpp"
#include "evtv/evalue.hpp"

namespace evtv {

struct SimulationParams {
  double p_u0 = 0.4;
  double p_l0 = 0.65;
  double p_u1 = 0.7;

  struct A0Model {
    double intercept = -0.8;
    double l0 = 1.2;
    double u0 = 1.0;
  } a0_model;

  struct L1Model {
    double intercept = -0.2;
    double a0 = 0.8;
    double l0 = 0.9;
  } l1_model;

  struct A1Model {
    double intercept = -1.2;
    double a0 = 1.0;
    double l1 = 1.2;
    double u1 = 0.8;
  } a1_model;

  struct OutcomeModel {
    double intercept = -0.5;
    double a0 = 1.0;
    double a1 = 1.2;
    double l0 = 0.7;
    double l1 = 0.8;
    double l0_l1 = 0.4;
    double u0 = -0.7;
    double u1 = -0.8;
  } outcome_model;

  std::size_t n = 1000;

  // Throws DomainError unless probabilities lie in (0, 1), coefficients are
  // finite and n >= 1.
  void validate() const;

  // Every U -> treatment and U -> outcome coefficient set to 0.
  SimulationParams without_unmeasured_confounding() const;
};

// Names accepted by set_param, e.g. "p_u0", "a1.u1", "y.l0_l1".
std::vector<std::string> param_names();
// Throws DomainError for an unknown name.
void set_param(SimulationParams& params, std::string_view name, double value);
double get_param(const SimulationParams& params, std::string_view name);

struct PotentialOutcomes {
  std::array<std::uint8_t, 4> y{};  // index 2*a0 + a1

  std::uint8_t at(int a0, int a1) const { return y[static_cast<std::size_t>(2 * a0 + a1)]; }
};

struct GeneratedCohort {
  Cohort records;
  std::vector<std::uint8_t> u0;
  std::vector<std::uint8_t> u1;
  std::vector<PotentialOutcomes> potential_outcomes;
};

// Each variable draws from its own counter-based stream keyed by the subject
// index; see rng.hpp.
GeneratedCohort generate_cohort(const SimulationParams& params, std::uint64_t seed);

// mean(Y^{1,1}) / mean(Y^{0,0}) over the cohort.
double true_rr_mc(const GeneratedCohort& cohort);

enum class L1Convention {
  // L1 drawn from P(L1 | a0, L0) under the intervened a0.
  Intervened,
  // L1 drawn as in the generator, from the subject's natural A0.
  Realized,
};

std::string_view to_string(L1Convention c);

// Exact P[Y^{a0,a1} = 1] by enumerating the binary confounders.
double regime_risk_enumerate(const SimulationParams& params, int a0, int a1,
                             L1Convention convention = L1Convention::Intervened);

// P[Y^{1,1}] / P[Y^{0,0}] by enumeration.
double true_rr_enumerate(const SimulationParams& params,
                         L1Convention convention = L1Convention::Intervened);

struct ExperimentOptions {
  std::size_t bootstrap_replicates = 0;  // 0 skips the interval
  std::size_t curve_points = 0;
  unsigned threads = 0;
};

struct ExperimentRecord {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double rr_true = 1.0;
  MsmResult msm;
  std::optional<BootstrapResult> bootstrap;
  EValueReport report;
};

// Generate, compute the true RR, drop U, estimate on observed data only and
// build the two-time-point E-value report. The bootstrap reuses `seed`.
ExperimentRecord run_experiment(const SimulationParams& params, std::uint64_t seed,
                                const ExperimentOptions& options = {});

struct SampleSummary {
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

SampleSummary summarize(std::span<const double> values);

struct ReplicationStudy {
  std::vector<ExperimentRecord> records;
  SampleSummary rr_true;
  SampleSummary rr_obs;
  SampleSummary weight_mean;
  double oracle_intervened = 1.0;
  double oracle_realized = 1.0;
};

// Replication r uses derive_seed(seed, replication stream, r) as its seed.
ReplicationStudy run_replications(const SimulationParams& params, std::uint64_t seed,
                                  std::size_t replications, const ExperimentOptions& options = {});

std::uint64_t replication_seed(std::uint64_t seed, std::size_t replication);

}  // namespace evtv
