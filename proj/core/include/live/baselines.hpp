#pragma once

#include <vector>
#include <Eigen/Core>

#include "live/inference.hpp"
#include "live/logistic.hpp"
#include "live/types.hpp"

namespace live {

/// Lasso-selected support with its low-dimensional refit.
struct SelectedModel {
  std::vector<Eigen::Index> support;  // nonzero pattern, intercept always kept
  MleFit mle;
};

/// Nonzero pattern of a fit; coordinates below 1e-10 in magnitude count as
/// unselected. The intercept column is always included when present.
std::vector<Eigen::Index> lasso_support(const FittedModel& model,
                                        bool has_intercept_column);

/// Plug-in point estimate h(x*'beta_hat); no variance, no CI.
InferenceResult plugin_lasso_inference(const Dataset& data, const Loading& x_star,
                                       const FittedModel& shared_fit,
                                       double alpha = 0.05, double threshold_c = 0.5);

/// Post-selection inference: refit an unpenalized logistic model on the
/// selected support and use classical MLE standard errors. A singular refit
/// or |S| >= n yields a flagged degenerate result with CI = [0, 1] rather
/// than an error.
InferenceResult post_selection_inference(const Dataset& data, const Loading& x_star,
                                         double alpha, double threshold_c,
                                         const FittedModel& shared_fit);

/// Convenience entry points that run their own cross-validated fit.
InferenceResult plugin_lasso_inference(const Dataset& data, const Loading& x_star,
                                       const InferOptions& opts, RngStream& stream);
InferenceResult post_selection_inference(const Dataset& data, const Loading& x_star,
                                         const InferOptions& opts, RngStream& stream);

}  // namespace live
