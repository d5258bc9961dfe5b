#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <Eigen/Core>

namespace live {

/// Error category, mapped to CLI exit codes (validation 2, numerical 3, io 4).
enum class ErrorKind { validation, numerical, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_validation(const std::string& msg) {
  throw Error(ErrorKind::validation, msg);
}
[[noreturn]] inline void throw_numerical(const std::string& msg) {
  throw Error(ErrorKind::numerical, msg);
}
[[noreturn]] inline void throw_io(const std::string& msg) {
  throw Error(ErrorKind::io, msg);
}

/// Design matrix with binary outcomes. When has_intercept_column is set,
/// column 0 is all ones.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  bool has_intercept_column = false;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }
};

/// Validates and assembles a Dataset. Errors: DimensionMismatch,
/// NonBinaryOutcome (with offending index), NonFiniteEntry,
/// BadInterceptColumn.
Dataset validate_dataset(Eigen::MatrixXd x, Eigen::VectorXd y,
                         bool has_intercept_column);

/// Covariate vector of the observation whose case probability is queried.
struct Loading {
  Eigen::VectorXd values;
  double norm() const { return values.norm(); }
};

/// Checks dimension against p, finiteness and nonzero norm.
Loading validate_loading(Eigen::VectorXd values, Eigen::Index p);

/// Penalized logistic fit.
struct FittedModel {
  Eigen::VectorXd beta_hat;
  double lambda = 0.0;
  double objective_value = 0.0;
  int iterations = 0;
  bool converged = false;
};

enum class Method { live, plugin_lasso, post_selection };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

/// Feasibility certificate of the projection step (LiVE only).
struct FeasibilityCertificate {
  double linf_residual = 0.0;
  double loading_residual = 0.0;
  double lambda_n = 0.0;
  double mu = 0.0;
  bool feasible = false;
};

struct InferenceResult {
  double linear_estimate = 0.0;
  double variance = 0.0;        // NaN for methods that provide no CI
  double case_probability = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double alpha = 0.0;
  bool reject_null = false;
  double p_value = 0.0;
  double threshold = 0.5;
  Method method = Method::live;

  bool has_ci = true;           // plug-in lasso: false
  bool degenerate = false;      // post-selection singular refit or |S| >= n
  bool separation = false;      // post-selection refit hit the separation bound
  int clamped_weights = 0;      // LiVE: number of floored linearization weights
  std::optional<FeasibilityCertificate> certificate;
};

}  // namespace live
