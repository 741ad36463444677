#pragma once

#include <Eigen/Dense>
#include <optional>

namespace evtv {

struct LogisticOptions {
  double score_tolerance = 1e-8;
  // A fit only counts as converged once the Newton step is this small too;
  // this keeps iterating on separated data until the threshold below trips.
  double step_tolerance = 1e-6;
  int max_iterations = 100;
  double separation_threshold = 30.0;
};

struct FittedLogistic {
  Eigen::VectorXd coefficients;  // intercept first when the design has one
  bool converged = false;
  int iterations = 0;
  double max_abs_gradient = 0.0;
  double log_likelihood = 0.0;
  // Some |coefficient| exceeded the separation threshold, or the response is
  // constant. The best iterate is still returned.
  bool separation = false;

  Eigen::VectorXd predict(const Eigen::MatrixXd& design) const;
};

double expit(double x);

// Maximizes the (weighted) Bernoulli log-likelihood by damped Newton steps.
// Throws SingularDesign when the weighted design is rank deficient.
FittedLogistic fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                            const std::optional<Eigen::VectorXd>& weights = std::nullopt,
                            const LogisticOptions& options = {});

}  // namespace evtv
