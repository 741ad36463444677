#include "evtv/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "evtv/errors.hpp"
#include "evtv/logistic.hpp"
#include "evtv/parallel.hpp"
#include "evtv/rng.hpp"

namespace evtv {

namespace {

struct ParamField {
  std::string_view name;
  double& (*access)(SimulationParams&);
};

#define EVTV_FIELD(label, member) \
  ParamField { label, [](SimulationParams& p) -> double& { return p.member; } }

constexpr std::array kFields = {
    EVTV_FIELD("p_u0", p_u0),
    EVTV_FIELD("p_l0", p_l0),
    EVTV_FIELD("p_u1", p_u1),
    EVTV_FIELD("a0.intercept", a0_model.intercept),
    EVTV_FIELD("a0.l0", a0_model.l0),
    EVTV_FIELD("a0.u0", a0_model.u0),
    EVTV_FIELD("l1.intercept", l1_model.intercept),
    EVTV_FIELD("l1.a0", l1_model.a0),
    EVTV_FIELD("l1.l0", l1_model.l0),
    EVTV_FIELD("a1.intercept", a1_model.intercept),
    EVTV_FIELD("a1.a0", a1_model.a0),
    EVTV_FIELD("a1.l1", a1_model.l1),
    EVTV_FIELD("a1.u1", a1_model.u1),
    EVTV_FIELD("y.intercept", outcome_model.intercept),
    EVTV_FIELD("y.a0", outcome_model.a0),
    EVTV_FIELD("y.a1", outcome_model.a1),
    EVTV_FIELD("y.l0", outcome_model.l0),
    EVTV_FIELD("y.l1", outcome_model.l1),
    EVTV_FIELD("y.l0_l1", outcome_model.l0_l1),
    EVTV_FIELD("y.u0", outcome_model.u0),
    EVTV_FIELD("y.u1", outcome_model.u1),
};

#undef EVTV_FIELD

const ParamField& find_field(std::string_view name) {
  for (const auto& f : kFields) {
    if (f.name == name) return f;
  }
  throw DomainError("unknown simulation parameter '" + std::string(name) + "'");
}

double p_a0(const SimulationParams& p, int l0, int u0) {
  return expit(p.a0_model.intercept + p.a0_model.l0 * l0 + p.a0_model.u0 * u0);
}

double p_l1(const SimulationParams& p, int a0, int l0) {
  return expit(p.l1_model.intercept + p.l1_model.a0 * a0 + p.l1_model.l0 * l0);
}

double p_a1(const SimulationParams& p, int a0, int l1, int u1) {
  return expit(p.a1_model.intercept + p.a1_model.a0 * a0 + p.a1_model.l1 * l1 + p.a1_model.u1 * u1);
}

double p_y(const SimulationParams& p, int a0, int a1, int l0, int l1, int u0, int u1) {
  const auto& m = p.outcome_model;
  return expit(m.intercept + m.a0 * a0 + m.a1 * a1 + m.l0 * l0 + m.l1 * l1 + m.l0_l1 * l0 * l1 +
               m.u0 * u0 + m.u1 * u1);
}

double bern(double p_one, int value) { return value == 1 ? p_one : 1.0 - p_one; }

std::uint8_t draw(std::uint64_t seed, std::uint64_t stream, std::size_t i, double p_one) {
  return rng::uniform01(seed, stream, i) < p_one ? 1 : 0;
}

}  // namespace

void SimulationParams::validate() const {
  for (double p : {p_u0, p_l0, p_u1}) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("simulation probabilities must lie in (0, 1)");
  }
  SimulationParams copy = *this;
  for (const auto& f : kFields) {
    if (!std::isfinite(f.access(copy))) {
      throw DomainError("simulation parameter '" + std::string(f.name) + "' is not finite");
    }
  }
  if (n < 1) throw DomainError("cohort size n must be >= 1");
}

SimulationParams SimulationParams::without_unmeasured_confounding() const {
  SimulationParams p = *this;
  p.a0_model.u0 = 0.0;
  p.a1_model.u1 = 0.0;
  p.outcome_model.u0 = 0.0;
  p.outcome_model.u1 = 0.0;
  return p;
}

std::vector<std::string> param_names() {
  std::vector<std::string> names;
  for (const auto& f : kFields) names.emplace_back(f.name);
  return names;
}

void set_param(SimulationParams& params, std::string_view name, double value) {
  find_field(name).access(params) = value;
}

double get_param(const SimulationParams& params, std::string_view name) {
  SimulationParams copy = params;
  return find_field(name).access(copy);
}

GeneratedCohort generate_cohort(const SimulationParams& params, std::uint64_t seed) {
  params.validate();
  namespace s = rng::stream;
  GeneratedCohort out;
  const std::size_t n = params.n;
  out.records.resize(n);
  out.u0.resize(n);
  out.u1.resize(n);
  out.potential_outcomes.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const int u0 = draw(seed, s::kU0, i, params.p_u0);
    const int l0 = draw(seed, s::kL0, i, params.p_l0);
    const int a0 = draw(seed, s::kA0, i, p_a0(params, l0, u0));
    const int u1 = draw(seed, s::kU1, i, params.p_u1);
    const int l1 = draw(seed, s::kL1, i, p_l1(params, a0, l0));
    const int a1 = draw(seed, s::kA1, i, p_a1(params, a0, l1, u1));

    PotentialOutcomes& po = out.potential_outcomes[i];
    constexpr std::array<std::uint64_t, 4> kRegimeStreams = {s::kY00, s::kY01, s::kY10, s::kY11};
    for (int r0 = 0; r0 < 2; ++r0) {
      for (int r1 = 0; r1 < 2; ++r1) {
        const auto idx = static_cast<std::size_t>(2 * r0 + r1);
        po.y[idx] = draw(seed, kRegimeStreams[idx], i, p_y(params, r0, r1, l0, l1, u0, u1));
      }
    }

    out.u0[i] = static_cast<std::uint8_t>(u0);
    out.u1[i] = static_cast<std::uint8_t>(u1);
    auto& rec = out.records[i];
    rec.l0 = static_cast<std::uint8_t>(l0);
    rec.a0 = static_cast<std::uint8_t>(a0);
    rec.l1 = static_cast<std::uint8_t>(l1);
    rec.a1 = static_cast<std::uint8_t>(a1);
    rec.y = po.at(a0, a1);
  }
  return out;
}

double true_rr_mc(const GeneratedCohort& cohort) {
  const auto& po = cohort.potential_outcomes;
  if (po.empty()) throw DomainError("true_rr_mc: cohort carries no potential outcomes");
  double sum11 = 0.0;
  double sum00 = 0.0;
  for (const auto& p : po) {
    sum11 += p.at(1, 1);
    sum00 += p.at(0, 0);
  }
  if (sum00 == 0.0) throw DegenerateEstimate("true_rr_mc: no events under the never-treated regime");
  return sum11 / sum00;
}

std::string_view to_string(L1Convention c) {
  return c == L1Convention::Intervened ? "intervened" : "realized";
}

double regime_risk_enumerate(const SimulationParams& params, int a0, int a1, L1Convention convention) {
  params.validate();
  double risk = 0.0;
  for (int u0 = 0; u0 < 2; ++u0) {
    for (int l0 = 0; l0 < 2; ++l0) {
      for (int u1 = 0; u1 < 2; ++u1) {
        for (int l1 = 0; l1 < 2; ++l1) {
          double p_l1_given;
          if (convention == L1Convention::Intervened) {
            p_l1_given = bern(p_l1(params, a0, l0), l1);
          } else {
            p_l1_given = 0.0;
            for (int natural_a0 = 0; natural_a0 < 2; ++natural_a0) {
              p_l1_given += bern(p_a0(params, l0, u0), natural_a0) * bern(p_l1(params, natural_a0, l0), l1);
            }
          }
          risk += bern(params.p_u0, u0) * bern(params.p_l0, l0) * bern(params.p_u1, u1) * p_l1_given *
                  p_y(params, a0, a1, l0, l1, u0, u1);
        }
      }
    }
  }
  return risk;
}

double true_rr_enumerate(const SimulationParams& params, L1Convention convention) {
  return regime_risk_enumerate(params, 1, 1, convention) / regime_risk_enumerate(params, 0, 0, convention);
}

ExperimentRecord run_experiment(const SimulationParams& params, std::uint64_t seed,
                                const ExperimentOptions& options) {
  const GeneratedCohort generated = generate_cohort(params, seed);
  ExperimentRecord rec;
  rec.seed = seed;
  rec.n = params.n;

  // Only the observed columns go to the estimator.
  const Cohort& observed = generated.records;
  rec.msm = estimate_msm(observed);
  rec.rr_true = true_rr_mc(generated);

  EffectEstimate estimate{Measure::RR, rec.msm.rr_obs, std::nullopt, std::nullopt, false};
  if (options.bootstrap_replicates > 0) {
    BootstrapOptions bo;
    bo.replicates = options.bootstrap_replicates;
    bo.seed = seed;
    bo.threads = options.threads;
    rec.bootstrap = bootstrap_ci(observed, bo);
    rec.msm.ci_lower = rec.bootstrap->ci_lower;
    rec.msm.ci_upper = rec.bootstrap->ci_upper;
    estimate.ci_lower = std::min(rec.bootstrap->ci_lower, rec.msm.rr_obs);
    estimate.ci_upper = std::max(rec.bootstrap->ci_upper, rec.msm.rr_obs);
  }
  rec.report = build_report(estimate, 2, options.curve_points);
  return rec;
}

SampleSummary summarize(std::span<const double> values) {
  if (values.empty()) throw DomainError("summarize: empty sample");
  SampleSummary s;
  const auto count = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / count;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (count - 1.0));
    s.se = s.sd / std::sqrt(count);
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.q025 = quantile_sorted(sorted, 0.025);
  s.q975 = quantile_sorted(sorted, 0.975);
  return s;
}

std::uint64_t replication_seed(std::uint64_t seed, std::size_t replication) {
  return rng::derive_seed(seed, rng::stream::kReplication, replication);
}

ReplicationStudy run_replications(const SimulationParams& params, std::uint64_t seed,
                                  std::size_t replications, const ExperimentOptions& options) {
  if (replications < 1) throw DomainError("run_replications: at least one replication required");
  params.validate();

  ReplicationStudy study;
  study.records.resize(replications);
  std::vector<std::exception_ptr> errors(replications);
  ExperimentOptions inner = options;
  inner.threads = 1;  // parallelism lives at the replication level
  detail::parallel_for(replications, options.threads, [&](std::size_t r) {
    try {
      study.records[r] = run_experiment(params, replication_seed(seed, r), inner);
    } catch (...) {
      errors[r] = std::current_exception();
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<double> rr_true;
  std::vector<double> rr_obs;
  std::vector<double> weight_mean;
  for (const auto& rec : study.records) {
    rr_true.push_back(rec.rr_true);
    rr_obs.push_back(rec.msm.rr_obs);
    weight_mean.push_back(rec.msm.weight_mean);
  }
  study.rr_true = summarize(rr_true);
  study.rr_obs = summarize(rr_obs);
  study.weight_mean = summarize(weight_mean);
  study.oracle_intervened = true_rr_enumerate(params, L1Convention::Intervened);
  study.oracle_realized = true_rr_enumerate(params, L1Convention::Realized);
  return study;
}

}  // namespace evtv
