#pragma once

#include <Eigen/Core>

#include "live/logistic.hpp"
#include "live/numerics.hpp"
#include "live/projection.hpp"
#include "live/types.hpp"

namespace live {

/// Linearization weights w_i = h(x_i'beta)(1 - h(x_i'beta)), floored at
/// w_floor so their inverses stay bounded on separation-region observations.
struct Weights {
  Eigen::VectorXd w;
  double w_floor = 1e-4;
  int clamped_count = 0;
};

Weights linearization_weights(const Dataset& data, const Eigen::VectorXd& beta,
                              double w_floor = 1e-4);

/// Bias-corrected linear estimate
///   x*'beta_hat + u' (1/n) sum_i w_i^{-1} X_i (y_i - h(X_i'beta_hat)).
double live_linear_estimate(const Dataset& data, const FittedModel& model,
                            const ProjectionDirection& direction,
                            const Loading& x_star, const Weights& weights);

/// V = (1/n^2) sum_i w_i^{-1} (u'X_i)^2; no p x p matrix is materialized.
double live_variance(const Dataset& data, const ProjectionDirection& direction,
                     const Weights& weights);

/// h(linear_estimate).
double case_probability(double linear_estimate);

/// (h(est - z_{alpha/2} sqrt(V)), h(est + z_{alpha/2} sqrt(V))); the interval
/// on the probability scale is the monotone image of the linear-scale one.
std::pair<double, double> confidence_interval(double linear_estimate,
                                              double variance, double alpha);

struct TestDecision {
  bool reject = false;
  double p_value = 1.0;
};

/// One-sided test of H0: h(x*'beta) < c.
/// reject = 1{est - z_alpha sqrt(V) >= logit(c)},
/// p_value = 1 - Phi((est - logit(c)) / sqrt(V)).
/// Throws "ZeroVariance" when variance is 0.
TestDecision case_label_test(double linear_estimate, double variance, double alpha,
                             double threshold_c);

struct InferOptions {
  double alpha = 0.05;
  double threshold_c = 0.5;
  double w_floor = 1e-4;
  std::optional<double> fixed_lambda;  // bypass cross-validation
  CvOptions cv;
  ProjectionOptions projection;
};

/// Full LiVE pipeline: cross-validated lasso fit, projection direction,
/// bias-corrected estimate, variance, CI and labelling test. Deterministic
/// given (data, x_star, stream).
InferenceResult infer(const Dataset& data, const Loading& x_star,
                      const InferOptions& opts, RngStream& stream);

/// Same pipeline on top of a shared fit and Gram (batch/simulation path).
InferenceResult infer_with_fit(const Dataset& data, const Loading& x_star,
                               const FittedModel& model, const Gram& gram,
                               const InferOptions& opts);

}  // namespace live
