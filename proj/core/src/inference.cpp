#include "live/inference.hpp"

#include <cmath>

#include "live/log.hpp"

namespace live {

Weights linearization_weights(const Dataset& data, const Eigen::VectorXd& beta,
                              double w_floor) {
  Weights out;
  out.w_floor = w_floor;
  out.w.resize(data.n());
  const Eigen::VectorXd eta = data.x * beta;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double h = sigmoid(eta[i]);
    const double w = h * (1.0 - h);
    if (w < w_floor) {
      out.w[i] = w_floor;
      ++out.clamped_count;
    } else {
      out.w[i] = w;
    }
  }
  return out;
}

double live_linear_estimate(const Dataset& data, const FittedModel& model,
                            const ProjectionDirection& direction,
                            const Loading& x_star, const Weights& weights) {
  const Eigen::VectorXd eta = data.x * model.beta_hat;
  const Eigen::VectorXd xu = data.x * direction.u_hat;
  double correction = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    correction += (data.y[i] - sigmoid(eta[i])) / weights.w[i] * xu[i];
  correction /= static_cast<double>(data.n());
  return x_star.values.dot(model.beta_hat) + correction;
}

double live_variance(const Dataset& data, const ProjectionDirection& direction,
                     const Weights& weights) {
  const Eigen::VectorXd xu = data.x * direction.u_hat;
  double v = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) v += xu[i] * xu[i] / weights.w[i];
  const double n = static_cast<double>(data.n());
  return v / (n * n);
}

double case_probability(double linear_estimate) {
  return sigmoid(linear_estimate);
}

std::pair<double, double> confidence_interval(double linear_estimate,
                                              double variance, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw_validation("confidence_interval: alpha must lie in (0, 1)");
  if (variance < 0.0) throw_validation("confidence_interval: negative variance");
  const double z = std_normal_quantile(1.0 - alpha / 2.0);
  const double half = z * std::sqrt(variance);
  return {sigmoid(linear_estimate - half), sigmoid(linear_estimate + half)};
}

TestDecision case_label_test(double linear_estimate, double variance, double alpha,
                             double threshold_c) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw_validation("case_label_test: alpha must lie in (0, 1)");
  if (!(threshold_c > 0.0 && threshold_c < 1.0))
    throw_validation("case_label_test: threshold must lie in (0, 1)");
  if (!(variance > 0.0))
    throw_numerical("ZeroVariance: labelling test needs a positive variance");
  const double logit_c = std::log(threshold_c / (1.0 - threshold_c));
  const double sd = std::sqrt(variance);
  const double stat = (linear_estimate - logit_c) / sd;
  TestDecision out;
  out.p_value = 1.0 - std_normal_cdf(stat);
  out.reject = linear_estimate - std_normal_quantile(1.0 - alpha) * sd >= logit_c;
  return out;
}

namespace {

InferenceResult assemble_live_result(const Dataset& data, const Loading& x_star,
                                     const FittedModel& model,
                                     const ProjectionDirection& direction,
                                     const InferOptions& opts) {
  const Weights weights = linearization_weights(data, model.beta_hat, opts.w_floor);
  InferenceResult r;
  r.method = Method::live;
  r.alpha = opts.alpha;
  r.threshold = opts.threshold_c;
  r.linear_estimate = live_linear_estimate(data, model, direction, x_star, weights);
  r.variance = live_variance(data, direction, weights);
  r.case_probability = case_probability(r.linear_estimate);
  std::tie(r.ci_lower, r.ci_upper) =
      confidence_interval(r.linear_estimate, r.variance, opts.alpha);
  const TestDecision t =
      case_label_test(r.linear_estimate, r.variance, opts.alpha, opts.threshold_c);
  r.reject_null = t.reject;
  r.p_value = t.p_value;
  r.clamped_weights = weights.clamped_count;
  r.certificate = FeasibilityCertificate{direction.linf_residual,
                                         direction.loading_residual,
                                         direction.lambda_n, direction.mu,
                                         direction.feasible};
  if (!direction.feasible)
    log::info("infer: projection direction flagged infeasible");
  return r;
}

}  // namespace

InferenceResult infer(const Dataset& data, const Loading& x_star,
                      const InferOptions& opts, RngStream& stream) {
  validate_loading(x_star.values, data.p());  // dims agree
  const CvResult cv = opts.fixed_lambda
                          ? CvResult{}
                          : cross_validate_lambda(data, stream, opts.cv);
  const double lambda = opts.fixed_lambda ? *opts.fixed_lambda : cv.lambda_min;
  LassoOptions fit_opts = opts.cv.fit;
  const FittedModel model = fit_logistic_lasso(data, lambda, fit_opts);
  const Gram gram = sample_gram(data);
  const ProjectionDirection direction =
      projection_direction(gram, x_star, opts.projection, &data);
  return assemble_live_result(data, x_star, model, direction, opts);
}

InferenceResult infer_with_fit(const Dataset& data, const Loading& x_star,
                               const FittedModel& model, const Gram& gram,
                               const InferOptions& opts) {
  validate_loading(x_star.values, data.p());
  const ProjectionDirection direction =
      projection_direction(gram, x_star, opts.projection, &data);
  return assemble_live_result(data, x_star, model, direction, opts);
}

}  // namespace live
