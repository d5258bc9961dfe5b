#include "live/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "live/log.hpp"
#include "live/projection.hpp"

namespace live {

void validate_config(const SimulationConfig& config) {
  if (config.n < 20) throw_validation("config: n must be >= 20");
  if (config.p < 2) throw_validation("config: p must be >= 2");
  if (config.n_reps < 1) throw_validation("config: n_reps must be >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0))
    throw_validation("config: alpha must lie in (0, 1)");
  if (!(config.threshold_c > 0.0 && config.threshold_c < 1.0))
    throw_validation("config: threshold must lie in (0, 1)");
  if (!(config.loading.r > 0.0)) throw_validation("config: loading r must be > 0");
  if (config.methods.empty()) throw_validation("config: methods must be nonempty");
}

Eigen::MatrixXd make_ar_covariance(int dim, double rho) {
  if (dim < 1) throw_validation("make_ar_covariance: dim must be >= 1");
  if (!(std::abs(rho) < 1.0))
    throw_validation("make_ar_covariance: |rho| must be below 1");
  // |rho| * rho^|j-l|: equals rho^(1+|j-l|) for rho > 0 and keeps the matrix
  // a valid covariance (positive diagonal) for the negative-base variant
  Eigen::MatrixXd sigma(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int l = 0; l < dim; ++l)
      sigma(j, l) = std::abs(rho) * std::pow(rho, std::abs(j - l));
  return sigma;
}

Eigen::VectorXd gen_beta(const BetaSpec& spec, int p) {
  if (p < 2) throw_validation("gen_beta: p must be >= 2");
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  // 1-indexed formulas from the simulation designs
  switch (spec.kind) {
    case BetaSpec::Kind::exact_sparse:
    case BetaSpec::Kind::exact_sparse_with_intercept:
      for (int j = 2; j <= std::min(p, 11); ++j) beta[j - 1] = (j - 1) / 20.0;
      if (spec.kind == BetaSpec::Kind::exact_sparse_with_intercept)
        beta[0] = spec.intercept;
      break;
    case BetaSpec::Kind::exact_sparse_adversarial:
      for (int j = 2; j <= std::min(p, 11); ++j) beta[j - 1] = (j - 1) / 20.0;
      if (p >= 9) beta[8] = 0.01;
      if (p >= 10) beta[9] = 0.01;
      break;
    case BetaSpec::Kind::decay:
      for (int j = 2; j <= p; ++j)
        beta[j - 1] = std::pow(j - 1, -spec.decay_exponent);
      break;
  }
  return beta;
}

Loading gen_loading(const LoadingSpec& spec, int p, RngStream& stream) {
  if (p < 2) throw_validation("gen_loading: p must be >= 2");
  const double rho = spec.kind == LoadingSpec::Kind::loading2 ? -0.75 : 0.5;
  const LowerTriangular chol = cholesky(make_ar_covariance(p - 1, rho));
  const Eigen::VectorXd z = sample_standard_gaussian(stream, p - 1);

  Eigen::VectorXd basis(p);
  basis[0] = 1.0;
  basis.tail(p - 1) = chol.l.triangularView<Eigen::Lower>() * z;

  const double r =
      spec.kind == LoadingSpec::Kind::loading3 ? 1.0 / 25.0 : spec.r;
  Eigen::VectorXd values = basis;
  for (int j = 12; j <= p; ++j) values[j - 1] *= r;
  if (spec.kind == LoadingSpec::Kind::loading3) {
    if (p >= 9) values[8] = 10.0;
    if (p >= 10) values[9] = 10.0;
  }
  return Loading{std::move(values)};
}

Dataset gen_dataset(int n, const Eigen::VectorXd& beta,
                    const LowerTriangular& chol, RngStream& stream) {
  const int p = static_cast<int>(beta.size());
  if (chol.dim() != p - 1)
    throw_validation("gen_dataset: Cholesky factor must be (p-1) x (p-1)");
  Dataset data;
  data.has_intercept_column = true;
  data.x.resize(n, p);
  data.y.resize(n);

  for (int i = 0; i < n; ++i) {
    data.x(i, 0) = 1.0;
    const Eigen::VectorXd z = sample_standard_gaussian(stream, p - 1);
    data.x.row(i).tail(p - 1) =
        (chol.l.triangularView<Eigen::Lower>() * z).transpose();
  }
  const Eigen::VectorXd eta = data.x * beta;
  for (int i = 0; i < n; ++i)
    data.y[i] = stream.next_uniform() < sigmoid(eta[i]) ? 1.0 : 0.0;
  return data;
}

ExperimentContext make_experiment_context(const SimulationConfig& config) {
  validate_config(config);
  ExperimentContext ctx;
  ctx.config = config;
  ctx.beta_true = gen_beta(config.beta, config.p);
  ctx.design_chol = cholesky(make_ar_covariance(config.p - 1, 0.5));
  RngStream loading_stream(config.master_seed, kLoadingStreamIndex);
  ctx.loading = gen_loading(config.loading, config.p, loading_stream);
  ctx.truth = sigmoid(ctx.loading.values.dot(ctx.beta_true));
  return ctx;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

MethodOutcome outcome_from(const InferenceResult& r, double runtime) {
  MethodOutcome o;
  o.ok = true;
  o.linear_estimate = r.linear_estimate;
  o.probability = r.case_probability;
  o.has_ci = r.has_ci;
  o.ci_lower = r.ci_lower;
  o.ci_upper = r.ci_upper;
  o.reject = r.reject_null;
  o.degenerate = r.degenerate;
  o.projection_feasible = r.certificate ? r.certificate->feasible : true;
  o.runtime_seconds = runtime;
  return o;
}

}  // namespace

ReplicationResult run_replication(const ExperimentContext& ctx, int rep_index) {
  const SimulationConfig& cfg = ctx.config;
  if (rep_index < 0 || rep_index >= cfg.n_reps)
    throw_validation("run_replication: rep_index out of range");

  ReplicationResult result;
  result.rep_index = rep_index;
  result.truth = ctx.truth;

  RngStream stream(cfg.master_seed, static_cast<std::uint64_t>(rep_index));
  const Dataset data =
      gen_dataset(cfg.n, ctx.beta_true, ctx.design_chol, stream);

  InferOptions opts;
  opts.alpha = cfg.alpha;
  opts.threshold_c = cfg.threshold_c;

  // One cross-validated fit feeds every configured method.
  const auto t_fit0 = std::chrono::steady_clock::now();
  FittedModel shared_fit;
  std::string fit_error;
  bool fit_ok = false;
  try {
    const CvResult cv = cross_validate_lambda(data, stream, opts.cv);
    shared_fit = fit_logistic_lasso(data, cv.lambda_min, opts.cv.fit);
    fit_ok = true;
  } catch (const std::exception& e) {
    fit_error = e.what();
  }
  const double t_fit = seconds_since(t_fit0);

  for (Method m : cfg.methods) {
    MethodOutcome o;
    if (!fit_ok) {
      o.error = "shared fit failed: " + fit_error;
      result.per_method.emplace_back(m, o);
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
      switch (m) {
        case Method::live: {
          const Gram gram = sample_gram(data);
          const InferenceResult r =
              infer_with_fit(data, ctx.loading, shared_fit, gram, opts);
          o = outcome_from(r, t_fit + seconds_since(t0));
          break;
        }
        case Method::plugin_lasso: {
          const InferenceResult r = plugin_lasso_inference(
              data, ctx.loading, shared_fit, cfg.alpha, cfg.threshold_c);
          o = outcome_from(r, t_fit + seconds_since(t0));
          break;
        }
        case Method::post_selection: {
          const InferenceResult r = post_selection_inference(
              data, ctx.loading, cfg.alpha, cfg.threshold_c, shared_fit);
          o = outcome_from(r, t_fit + seconds_since(t0));
          break;
        }
      }
    } catch (const std::exception& e) {
      o.ok = false;
      o.error = e.what();
      o.runtime_seconds = t_fit + seconds_since(t0);
    }
    result.per_method.emplace_back(m, o);
  }
  return result;
}

ReplicationResult run_replication(const SimulationConfig& config, int rep_index) {
  return run_replication(make_experiment_context(config), rep_index);
}

SummaryMetrics aggregate(const std::vector<ReplicationResult>& results,
                         double truth) {
  if (results.empty()) throw_validation("aggregate: empty result list");

  SummaryMetrics summary;
  if (results.front().per_method.empty()) return summary;

  for (std::size_t mi = 0; mi < results.front().per_method.size(); ++mi) {
    const Method method = results.front().per_method[mi].first;
    MethodMetrics mm;
    std::vector<double> probs, lens, runtimes;
    int n_cover = 0, n_reject = 0, n_ci = 0;
    for (const ReplicationResult& rep : results) {
      const MethodOutcome& o = rep.per_method.at(mi).second;
      if (!o.ok) {
        ++mm.n_failed;
        continue;
      }
      probs.push_back(o.probability);
      runtimes.push_back(o.runtime_seconds);
      if (o.has_ci) {
        ++n_ci;
        if (o.ci_lower <= truth && truth <= o.ci_upper) ++n_cover;
        if (o.reject) ++n_reject;
        lens.push_back(o.ci_upper - o.ci_lower);
      }
    }
    mm.n_used = static_cast<int>(probs.size());
    mm.n_ci = n_ci;
    if (!probs.empty()) {
      const double mean =
          std::accumulate(probs.begin(), probs.end(), 0.0) / probs.size();
      mm.bias = mean - truth;
      double ss = 0.0;
      for (double v : probs) ss += (v - mean) * (v - mean);
      mm.se = std::sqrt(ss / probs.size());  // population divisor
      mm.rmse = std::sqrt(mm.bias * mm.bias + mm.se * mm.se);
      mm.mean_runtime =
          std::accumulate(runtimes.begin(), runtimes.end(), 0.0) / runtimes.size();
    }
    if (n_ci > 0) {
      mm.cov = static_cast<double>(n_cover) / n_ci;
      mm.err = static_cast<double>(n_reject) / n_ci;
      mm.len = std::accumulate(lens.begin(), lens.end(), 0.0) / n_ci;
    }
    summary.per_method.emplace_back(method, mm);
  }
  return summary;
}

std::vector<ReplicationResult> run_experiment(const ExperimentContext& ctx,
                                              int jobs,
                                              std::vector<int> rep_indices,
                                              const ProgressFn& progress) {
  if (rep_indices.empty()) {
    rep_indices.resize(ctx.config.n_reps);
    std::iota(rep_indices.begin(), rep_indices.end(), 0);
  }
  std::sort(rep_indices.begin(), rep_indices.end());
  const int total = static_cast<int>(rep_indices.size());
  std::vector<ReplicationResult> results(total);

  jobs = std::max(1, jobs);
  std::atomic<int> cursor{0};
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    while (true) {
      const int slot = cursor.fetch_add(1);
      if (slot >= total) return;
      try {
        results[slot] = run_replication(ctx, rep_indices[slot]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
      const int d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(results[slot], d, total);
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

}  // namespace live
