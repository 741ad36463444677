#include "evtv/logistic.hpp"

#include <cmath>
#include <string>

#include "evtv/errors.hpp"

namespace evtv {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double log_likelihood(const Eigen::VectorXd& eta, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (w[i] == 0.0) continue;
    ll += w[i] * (y[i] * eta[i] - softplus(eta[i]));
  }
  return ll;
}

}  // namespace

double expit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::VectorXd FittedLogistic::predict(const Eigen::MatrixXd& design) const {
  Eigen::VectorXd eta = design * coefficients;
  return eta.unaryExpr([](double v) { return expit(v); });
}

FittedLogistic fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                            const std::optional<Eigen::VectorXd>& weights,
                            const LogisticOptions& options) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (n == 0 || p == 0) throw DomainError("fit_logistic: empty design");
  if (response.size() != n) throw DomainError("fit_logistic: design rows and response length differ");

  Eigen::VectorXd w = weights.value_or(Eigen::VectorXd::Ones(n));
  if (w.size() != n) throw DomainError("fit_logistic: weight vector length differs from response");
  bool seen0 = false;
  bool seen1 = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0) throw DomainError("fit_logistic: weights must be finite and >= 0");
    if (response[i] != 0.0 && response[i] != 1.0) throw DomainError("fit_logistic: response must be 0/1");
    if (w[i] > 0.0) (response[i] == 1.0 ? seen1 : seen0) = true;
  }

  {
    const Eigen::MatrixXd scaled = w.cwiseSqrt().asDiagonal() * design;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) {
      throw SingularDesign("fit_logistic: design has rank " + std::to_string(qr.rank()) + " < " +
                           std::to_string(p) + " columns (collinear predictors)");
    }
  }

  FittedLogistic fit;
  fit.coefficients = Eigen::VectorXd::Zero(p);
  fit.separation = !(seen0 && seen1);

  Eigen::VectorXd eta = design * fit.coefficients;
  double ll = log_likelihood(eta, response, w);

  for (;;) {
    const Eigen::VectorXd mu = eta.unaryExpr([](double v) { return expit(v); });
    const Eigen::VectorXd score = design.transpose() * (w.array() * (response - mu).array()).matrix();
    const Eigen::VectorXd curvature = (w.array() * mu.array() * (1.0 - mu.array())).matrix();
    const Eigen::MatrixXd info = design.transpose() * curvature.asDiagonal() * design;
    fit.max_abs_gradient = score.cwiseAbs().maxCoeff();

    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    Eigen::VectorXd step = ldlt.solve(score);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) step = score;  // gradient ascent fallback

    if (fit.max_abs_gradient < options.score_tolerance &&
        step.cwiseAbs().maxCoeff() < options.step_tolerance) {
      fit.converged = true;
      break;
    }
    if (fit.iterations >= options.max_iterations) break;

    // Step halving until the likelihood does not decrease.
    double scale = 1.0;
    Eigen::VectorXd candidate;
    Eigen::VectorXd candidate_eta;
    double candidate_ll = ll;
    for (int halvings = 0; halvings < 40; ++halvings, scale *= 0.5) {
      candidate = fit.coefficients + scale * step;
      candidate_eta = design * candidate;
      candidate_ll = log_likelihood(candidate_eta, response, w);
      if (candidate_ll >= ll - 1e-10 * (1.0 + std::abs(ll))) break;
    }
    fit.coefficients = candidate;
    eta = candidate_eta;
    ll = candidate_ll;
    ++fit.iterations;

    if (fit.coefficients.cwiseAbs().maxCoeff() > options.separation_threshold) {
      fit.separation = true;
      const Eigen::VectorXd final_mu = eta.unaryExpr([](double v) { return expit(v); });
      fit.max_abs_gradient =
          (design.transpose() * (w.array() * (response - final_mu).array()).matrix()).cwiseAbs().maxCoeff();
      break;
    }
  }
  fit.log_likelihood = ll;
  return fit;
}

}  // namespace evtv
