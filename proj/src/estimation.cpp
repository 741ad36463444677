#include "evtv/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "evtv/errors.hpp"
#include "evtv/logistic.hpp"
#include "evtv/parallel.hpp"
#include "evtv/rng.hpp"

namespace evtv {

namespace {

struct TreatmentDesigns {
  Eigen::MatrixXd intercept;  // 1
  Eigen::MatrixXd a0_only;    // 1, A0
  Eigen::MatrixXd l0_only;    // 1, L0
  Eigen::MatrixXd history;    // 1, A0, L0, L1
  Eigen::VectorXd a0;
  Eigen::VectorXd a1;
};

TreatmentDesigns build_designs(std::span<const CohortRecord> cohort) {
  const auto n = static_cast<Eigen::Index>(cohort.size());
  TreatmentDesigns d;
  d.intercept = Eigen::MatrixXd::Ones(n, 1);
  d.a0_only = Eigen::MatrixXd::Ones(n, 2);
  d.l0_only = Eigen::MatrixXd::Ones(n, 2);
  d.history = Eigen::MatrixXd::Ones(n, 4);
  d.a0.resize(n);
  d.a1.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = cohort[static_cast<std::size_t>(i)];
    d.a0_only(i, 1) = r.a0;
    d.l0_only(i, 1) = r.l0;
    d.history(i, 1) = r.a0;
    d.history(i, 2) = r.l0;
    d.history(i, 3) = r.l1;
    d.a0[i] = r.a0;
    d.a1[i] = r.a1;
  }
  return d;
}

void require_both_arms(const Eigen::VectorXd& treatment, const char* name) {
  const double treated = treatment.sum();
  if (treated == 0.0 || treated == static_cast<double>(treatment.size())) {
    std::ostringstream msg;
    msg << "positivity violation: every subject has " << name << " = " << (treated == 0.0 ? 0 : 1);
    throw PositivityViolation(msg.str());
  }
}

void check_positivity(const Eigen::VectorXd& prob, double floor, const char* model) {
  for (Eigen::Index i = 0; i < prob.size(); ++i) {
    if (std::min(prob[i], 1.0 - prob[i]) < floor) {
      std::ostringstream msg;
      msg << "positivity violation: fitted probability " << prob[i] << " in " << model
          << " for subject " << i;
      throw PositivityViolation(msg.str());
    }
  }
}

double prob_of(double p_one, double level) { return level == 1.0 ? p_one : 1.0 - p_one; }

void truncate(std::vector<double>& weights, double q) {
  if (!(q > 0.0 && q < 0.5)) throw DomainError("truncation quantile must lie in (0, 0.5)");
  std::vector<double> sorted = weights;
  std::sort(sorted.begin(), sorted.end());
  const double lo = quantile_sorted(sorted, q);
  const double hi = quantile_sorted(sorted, 1.0 - q);
  for (double& w : weights) w = std::clamp(w, lo, hi);
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DomainError("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> stabilized_weights(std::span<const CohortRecord> cohort, const WeightOptions& options) {
  if (cohort.empty()) throw DomainError("stabilized_weights: empty cohort");
  const TreatmentDesigns d = build_designs(cohort);
  require_both_arms(d.a0, "A0");
  require_both_arms(d.a1, "A1");

  const Eigen::VectorXd num0 = fit_logistic(d.intercept, d.a0).predict(d.intercept);
  const Eigen::VectorXd den0 = fit_logistic(d.l0_only, d.a0).predict(d.l0_only);
  const Eigen::VectorXd num1 = fit_logistic(d.a0_only, d.a1).predict(d.a0_only);
  const Eigen::VectorXd den1 = fit_logistic(d.history, d.a1).predict(d.history);
  check_positivity(den0, options.positivity_floor, "P(A0|L0)");
  check_positivity(den1, options.positivity_floor, "P(A1|A0,L0,L1)");
  check_positivity(num0, options.positivity_floor, "P(A0)");
  check_positivity(num1, options.positivity_floor, "P(A1|A0)");

  std::vector<double> weights(cohort.size());
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    weights[i] = prob_of(num0[k], d.a0[k]) / prob_of(den0[k], d.a0[k]) *
                 prob_of(num1[k], d.a1[k]) / prob_of(den1[k], d.a1[k]);
  }
  if (options.truncate_quantile) truncate(weights, *options.truncate_quantile);
  return weights;
}

MsmResult fit_msm(std::span<const CohortRecord> cohort, std::span<const double> weights) {
  if (cohort.empty()) throw DomainError("fit_msm: empty cohort");
  if (weights.size() != cohort.size()) throw DomainError("fit_msm: one weight per subject required");

  const auto n = static_cast<Eigen::Index>(cohort.size());
  Eigen::MatrixXd design = Eigen::MatrixXd::Ones(n, 3);
  Eigen::VectorXd y(n);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = cohort[static_cast<std::size_t>(i)];
    design(i, 1) = r.a0;
    design(i, 2) = r.a1;
    y[i] = r.y;
    w[i] = weights[static_cast<std::size_t>(i)];
  }

  const FittedLogistic fit = fit_logistic(design, y, w);
  MsmResult result;
  result.coefficients.assign(fit.coefficients.data(), fit.coefficients.data() + fit.coefficients.size());
  result.p00 = expit(fit.coefficients[0]);
  result.p11 = expit(fit.coefficients.sum());
  result.separation = fit.separation;
  if (!fit.converged) result.warnings.emplace_back("outcome model did not converge");
  if (fit.separation) result.warnings.emplace_back("separation in outcome model");
  // A separated fit stops at an arbitrary point on the ray to infinity, so a
  // small p00 there means the ratio is unbounded.
  if (result.p00 < 1e-8 || (fit.separation && result.p00 < 1e-3)) {
    throw DegenerateEstimate("fit_msm: fitted P(Y^{0,0}) collapsed to 0 (separated outcome model)");
  }
  result.rr_obs = result.p11 / result.p00;
  result.weight_mean = std::accumulate(weights.begin(), weights.end(), 0.0) / static_cast<double>(n);
  result.weight_max = *std::max_element(weights.begin(), weights.end());
  if (result.weight_mean < 0.8 || result.weight_mean > 1.2) {
    std::ostringstream msg;
    msg << "mean stabilized weight " << result.weight_mean << " outside [0.8, 1.2]; check the treatment models";
    result.warnings.push_back(msg.str());
  }
  return result;
}

MsmResult estimate_msm(std::span<const CohortRecord> cohort, const WeightOptions& options) {
  const std::vector<double> weights = stabilized_weights(cohort, options);
  return fit_msm(cohort, weights);
}

BootstrapResult bootstrap_ci(std::span<const CohortRecord> cohort, const BootstrapOptions& options) {
  if (cohort.empty()) throw DomainError("bootstrap_ci: empty cohort");
  if (options.replicates < 100) throw DomainError("bootstrap_ci: at least 100 replicates required");

  const std::size_t n = cohort.size();
  std::vector<double> estimates(options.replicates, std::nan(""));
  detail::parallel_for(options.replicates, options.threads, [&](std::size_t k) {
    rng::Xoshiro256 engine(rng::derive_seed(options.seed, rng::stream::kBootstrap, k));
    std::vector<CohortRecord> sample(n);
    for (auto& rec : sample) rec = cohort[engine.below(n)];
    try {
      const MsmResult r = estimate_msm(sample, options.weights);
      if (!r.separation) estimates[k] = r.rr_obs;
    } catch (const EstimationError&) {
    }
  });

  BootstrapResult result;
  std::vector<double> ok;
  ok.reserve(estimates.size());
  for (double e : estimates) {
    if (std::isnan(e)) {
      ++result.failed;
    } else {
      ok.push_back(e);
    }
  }
  result.successful = ok.size();
  if (static_cast<double>(result.failed) > options.max_failure_fraction * static_cast<double>(options.replicates)) {
    std::ostringstream msg;
    msg << "bootstrap: " << result.failed << " of " << options.replicates
        << " replicates failed (positivity or separation)";
    throw BootstrapFailure(msg.str());
  }
  std::sort(ok.begin(), ok.end());
  result.ci_lower = quantile_sorted(ok, 0.025);
  result.ci_upper = quantile_sorted(ok, 0.975);
  return result;
}

}  // namespace evtv
