#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "live/baselines.hpp"
#include "live/inference.hpp"
#include "live/numerics.hpp"
#include "live/types.hpp"

namespace live {

struct BetaSpec {
  enum class Kind {
    exact_sparse,                // beta_j = (j-1)/20 for j = 2..11, else 0
    decay,                       // beta_j = (j-1)^(-exponent), j >= 2
    exact_sparse_adversarial,    // exact sparse but beta_9 = beta_10 = 0.01
    exact_sparse_with_intercept  // exact sparse plus beta_1 = intercept
  };
  Kind kind = Kind::exact_sparse;
  double decay_exponent = 2.0;
  double intercept = 0.0;
};

struct LoadingSpec {
  enum class Kind { loading1, loading2, loading3 };
  Kind kind = Kind::loading1;
  double r = 1.0;  // tail shrink ratio; loading3 always uses 1/25
};

struct SimulationConfig {
  int n = 200;
  int p = 501;  // total columns including the intercept
  BetaSpec beta;
  LoadingSpec loading;
  int n_reps = 200;
  double alpha = 0.05;
  double threshold_c = 0.5;
  std::uint64_t master_seed = 1;
  std::vector<Method> methods{Method::live, Method::plugin_lasso,
                              Method::post_selection};
};

void validate_config(const SimulationConfig& config);

/// AR covariance {rho^(1+|j-l|)}; |rho| must be below 1.
Eigen::MatrixXd make_ar_covariance(int dim, double rho);

Eigen::VectorXd gen_beta(const BetaSpec& spec, int p);

/// Loading draw: entry 1 is 1, the rest come from N(0, Sigma_spec) via
/// Cholesky, entries 12..p multiplied by r. Drawn once per experiment from a
/// dedicated stream and shared across replications.
Loading gen_loading(const LoadingSpec& spec, int p, RngStream& stream);

/// X has an all-ones first column, remaining columns L z with z ~ N(0, I);
/// y_i ~ Bernoulli(h(X_i'beta)) using one uniform per observation after all
/// rows are drawn.
Dataset gen_dataset(int n, const Eigen::VectorXd& beta,
                    const LowerTriangular& chol, RngStream& stream);

/// Stream index reserved for the once-per-experiment loading draw;
/// replication r uses stream index r.
inline constexpr std::uint64_t kLoadingStreamIndex = std::uint64_t{1} << 62;

struct MethodOutcome {
  bool ok = false;
  std::string error;
  double linear_estimate = std::numeric_limits<double>::quiet_NaN();
  double probability = std::numeric_limits<double>::quiet_NaN();
  double ci_lower = std::numeric_limits<double>::quiet_NaN();
  double ci_upper = std::numeric_limits<double>::quiet_NaN();
  bool has_ci = false;
  bool reject = false;
  bool degenerate = false;
  bool projection_feasible = true;
  double runtime_seconds = 0.0;
};

struct ReplicationResult {
  int rep_index = 0;
  double truth = 0.0;  // h(x*'beta), identical across methods
  std::vector<std::pair<Method, MethodOutcome>> per_method;
};

/// Once-per-experiment state shared by every replication.
struct ExperimentContext {
  SimulationConfig config;
  Eigen::VectorXd beta_true;
  LowerTriangular design_chol;  // AR(0.5) factor for the p-1 covariates
  Loading loading;
  double truth = 0.0;
};

ExperimentContext make_experiment_context(const SimulationConfig& config);

ReplicationResult run_replication(const ExperimentContext& ctx, int rep_index);
ReplicationResult run_replication(const SimulationConfig& config, int rep_index);

struct MethodMetrics {
  double cov = std::numeric_limits<double>::quiet_NaN();
  double err = std::numeric_limits<double>::quiet_NaN();
  double len = std::numeric_limits<double>::quiet_NaN();
  double rmse = std::numeric_limits<double>::quiet_NaN();
  double bias = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  double mean_runtime = std::numeric_limits<double>::quiet_NaN();
  int n_used = 0;    // replications behind bias/se/rmse
  int n_ci = 0;      // replications behind cov/err/len
  int n_failed = 0;  // recorded method failures
};

struct SummaryMetrics {
  std::vector<std::pair<Method, MethodMetrics>> per_method;
};

/// Cov, ERR, Len, Bias, SE (population divisor), RMSE = sqrt(Bias^2 + SE^2).
/// Failed methods are excluded from the affected metrics with a count.
SummaryMetrics aggregate(const std::vector<ReplicationResult>& results,
                         double truth);

using ProgressFn = std::function<void(const ReplicationResult&, int done, int total)>;

/// Runs the given replication indices (all of 0..n_reps-1 when empty) on a
/// work-stealing pool of `jobs` threads. Output is ordered by rep_index and
/// identical for any jobs value.
std::vector<ReplicationResult> run_experiment(
    const ExperimentContext& ctx, int jobs,
    std::vector<int> rep_indices = {}, const ProgressFn& progress = nullptr);

}  // namespace live
