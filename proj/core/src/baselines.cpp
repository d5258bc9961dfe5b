#include "live/baselines.hpp"

#include <cmath>
#include <limits>

#include "live/log.hpp"

namespace live {

namespace {

constexpr double kZeroPattern = 1e-10;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::vector<Eigen::Index> lasso_support(const FittedModel& model,
                                        bool has_intercept_column) {
  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < model.beta_hat.size(); ++j) {
    if (j == 0 && has_intercept_column) {
      support.push_back(j);
      continue;
    }
    if (std::abs(model.beta_hat[j]) >= kZeroPattern) support.push_back(j);
  }
  return support;
}

InferenceResult plugin_lasso_inference(const Dataset& data, const Loading& x_star,
                                       const FittedModel& shared_fit, double alpha,
                                       double threshold_c) {
  validate_loading(x_star.values, data.p());
  InferenceResult r;
  r.method = Method::plugin_lasso;
  r.alpha = alpha;
  r.threshold = threshold_c;
  r.linear_estimate = x_star.values.dot(shared_fit.beta_hat);
  r.case_probability = case_probability(r.linear_estimate);
  r.variance = kNaN;  // no valid CI: the plug-in bias is not quantified
  r.has_ci = false;
  r.ci_lower = kNaN;
  r.ci_upper = kNaN;
  r.p_value = kNaN;
  r.reject_null = false;
  return r;
}

InferenceResult post_selection_inference(const Dataset& data, const Loading& x_star,
                                         double alpha, double threshold_c,
                                         const FittedModel& shared_fit) {
  validate_loading(x_star.values, data.p());
  InferenceResult r;
  r.method = Method::post_selection;
  r.alpha = alpha;
  r.threshold = threshold_c;

  const std::vector<Eigen::Index> support =
      lasso_support(shared_fit, data.has_intercept_column);

  auto degenerate = [&](const std::string& why) {
    log::info("post-selection: degenerate refit (" + why + ")");
    r.degenerate = true;
    r.linear_estimate = x_star.values.dot(shared_fit.beta_hat);
    r.case_probability = case_probability(r.linear_estimate);
    r.variance = kNaN;
    r.ci_lower = 0.0;
    r.ci_upper = 1.0;
    r.p_value = 1.0;
    r.reject_null = false;
    return r;
  };

  if (static_cast<Eigen::Index>(support.size()) >= data.n())
    return degenerate("|S| >= n, MLE undefined");
  if (support.empty()) return degenerate("empty support");

  Eigen::MatrixXd xs(data.n(), static_cast<Eigen::Index>(support.size()));
  Eigen::VectorXd loading_s(static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    xs.col(static_cast<Eigen::Index>(k)) = data.x.col(support[k]);
    loading_s[static_cast<Eigen::Index>(k)] = x_star.values[support[k]];
  }

  MleFit fit;
  try {
    fit = fit_logistic_mle(xs, data.y);
  } catch (const Error& e) {
    return degenerate(e.what());
  }

  r.linear_estimate = loading_s.dot(fit.coefficients);
  r.case_probability = case_probability(r.linear_estimate);
  r.variance = loading_s.dot(fit.covariance * loading_s);
  r.separation = fit.separation_detected;
  if (!(r.variance > 0.0) || !std::isfinite(r.variance))
    return degenerate("non-positive variance from the refit");
  std::tie(r.ci_lower, r.ci_upper) =
      confidence_interval(r.linear_estimate, r.variance, alpha);
  const TestDecision t =
      case_label_test(r.linear_estimate, r.variance, alpha, threshold_c);
  r.reject_null = t.reject;
  r.p_value = t.p_value;
  return r;
}

InferenceResult plugin_lasso_inference(const Dataset& data, const Loading& x_star,
                                       const InferOptions& opts, RngStream& stream) {
  const CvResult cv = cross_validate_lambda(data, stream, opts.cv);
  const FittedModel fit = fit_logistic_lasso(data, cv.lambda_min, opts.cv.fit);
  return plugin_lasso_inference(data, x_star, fit, opts.alpha, opts.threshold_c);
}

InferenceResult post_selection_inference(const Dataset& data, const Loading& x_star,
                                         const InferOptions& opts, RngStream& stream) {
  const CvResult cv = cross_validate_lambda(data, stream, opts.cv);
  const FittedModel fit = fit_logistic_lasso(data, cv.lambda_min, opts.cv.fit);
  return post_selection_inference(data, x_star, opts.alpha, opts.threshold_c, fit);
}

}  // namespace live
