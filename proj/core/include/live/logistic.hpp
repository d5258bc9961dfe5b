#pragma once

#include <optional>
#include <vector>
#include <Eigen/Core>

#include "live/numerics.hpp"
#include "live/types.hpp"

namespace live {

/// h(z) = exp(z) / (1 + exp(z)), evaluated in the stable branch form.
double sigmoid(double z);

/// (1/n) * sum_i [log(1 + exp(x_i'beta)) - y_i * x_i'beta], log1p-stable.
double neg_log_likelihood(const Eigen::VectorXd& beta, const Dataset& data);

/// Gradient of the (1/n)-scaled negative log-likelihood.
Eigen::VectorXd nll_gradient(const Eigen::VectorXd& beta, const Dataset& data);

struct LassoOptions {
  int max_iter = 100000;  // coordinate updates
  double tol = 1e-7;      // KKT residual of the (1/n)-scaled objective
  bool penalize_intercept = false;
  bool standardize = false;  // unit-variance scaling with back-transformation
  std::optional<Eigen::VectorXd> warm_start;
  // when set, receives the penalized objective after each outer pass
  std::vector<double>* objective_trace = nullptr;
};

/// Smallest lambda at which all penalized coordinates of the lasso solution
/// are zero.
double lasso_lambda_max(const Dataset& data, bool penalize_intercept = false);

/// Max KKT-stationarity violation at beta: for penalized beta_j = 0 the
/// excess of |g_j| over lambda, for beta_j != 0 the value |g_j + lambda
/// sign(beta_j)|, and |g_j| for unpenalized coordinates.
double lasso_kkt_residual(const Dataset& data, const Eigen::VectorXd& beta,
                          double lambda, bool penalize_intercept = false);

/// l1-penalized logistic fit by cyclic coordinate descent on the IRLS
/// quadratic surrogate. Each outer pass is guaranteed not to increase the
/// penalized objective (falls back to the 1/4-curvature majorizer when the
/// IRLS step overshoots). Non-convergence after max_iter coordinate updates
/// returns converged = false rather than throwing.
FittedModel fit_logistic_lasso(const Dataset& data, double lambda,
                               const LassoOptions& opts = {});

struct CvOptions {
  int n_folds = 10;
  int grid_size = 50;
  double lambda_min_ratio = 0.01;
  LassoOptions fit;
};

struct CvResult {
  Eigen::VectorXd lambda_grid;  // strictly decreasing, from lambda_max down
  Eigen::VectorXd cv_deviance;  // mean held-out negative log-likelihood
  Eigen::VectorXd cv_se;        // standard error across folds
  double lambda_min = 0.0;
  double lambda_1se = 0.0;
};

/// K-fold cross-validation over a geometric lambda grid. Folds come from a
/// seeded permutation of the stream, so identical streams give identical
/// results.
CvResult cross_validate_lambda(const Dataset& data, RngStream& stream,
                               const CvOptions& opts = {});

struct MleOptions {
  int max_iter = 100;
  double tol = 1e-10;             // gradient inf-norm of the (1/n)-scaled nll
  double separation_bound = 30.0; // |x_i'b| beyond it flags separation
};

struct MleFit {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;  // (X' W X)^{-1} at the final iterate
  bool converged = false;
  bool separation_detected = false;
};

/// Unpenalized logistic MLE by Newton-Raphson with step halving, for the
/// low-dimensional refit of post-selection inference. Throws a numerical
/// Error ("SingularHessian") when X'WX is not invertible at the final
/// iterate.
MleFit fit_logistic_mle(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const MleOptions& opts = {});

}  // namespace live
