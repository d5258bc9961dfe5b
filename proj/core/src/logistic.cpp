#include "live/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>
#include <Eigen/Dense>

#include "live/log.hpp"

namespace live {

double sigmoid(double z) {
  if (!std::isfinite(z)) throw_validation("sigmoid: non-finite argument");
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(z)) without overflow
inline double log1p_exp(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

double nll_from_eta(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    s += log1p_exp(eta[i]) - y[i] * eta[i];
  return s / static_cast<double>(eta.size());
}

}  // namespace

double neg_log_likelihood(const Eigen::VectorXd& beta, const Dataset& data) {
  if (beta.size() != data.p())
    throw_validation("neg_log_likelihood: beta has " + std::to_string(beta.size()) +
                     " entries, expected " + std::to_string(data.p()));
  return nll_from_eta(data.x * beta, data.y);
}

Eigen::VectorXd nll_gradient(const Eigen::VectorXd& beta, const Dataset& data) {
  const Eigen::VectorXd eta = data.x * beta;
  Eigen::VectorXd resid(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) resid[i] = sigmoid(eta[i]) - data.y[i];
  return data.x.transpose() * resid / static_cast<double>(data.n());
}

double lasso_lambda_max(const Dataset& data, bool penalize_intercept) {
  const double n = static_cast<double>(data.n());
  const bool free_intercept = data.has_intercept_column && !penalize_intercept;
  if (free_intercept) {
    const double ybar = data.y.mean();
    const Eigen::VectorXd r = data.y.array() - ybar;
    const double lmax =
        (data.x.rightCols(data.p() - 1).transpose() * r).cwiseAbs().maxCoeff() / n;
    if (!(lmax > 0.0))
      throw_numerical("lasso_lambda_max: degenerate grid (single-class outcomes?)");
    return lmax;
  }
  const Eigen::VectorXd r = data.y.array() - 0.5;
  const double lmax = (data.x.transpose() * r).cwiseAbs().maxCoeff() / n;
  if (!(lmax > 0.0)) throw_numerical("lasso_lambda_max: degenerate grid");
  return lmax;
}

namespace {

double kkt_residual_raw(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& beta, double lambda,
                        bool free_intercept) {
  const Eigen::VectorXd eta = x * beta;
  Eigen::VectorXd resid(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) resid[i] = sigmoid(eta[i]) - y[i];
  const Eigen::VectorXd g = x.transpose() * resid / static_cast<double>(x.rows());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    double r;
    if (free_intercept && j == 0)
      r = std::abs(g[j]);
    else if (beta[j] == 0.0)
      r = std::max(0.0, std::abs(g[j]) - lambda);
    else
      r = std::abs(g[j] + lambda * (beta[j] > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, r);
  }
  return worst;
}

}  // namespace

double lasso_kkt_residual(const Dataset& data, const Eigen::VectorXd& beta,
                          double lambda, bool penalize_intercept) {
  return kkt_residual_raw(data.x, data.y, beta, lambda,
                          data.has_intercept_column && !penalize_intercept);
}

namespace {

constexpr double kIrlsWeightFloor = 1e-5;

struct CdWorkspace {
  Eigen::VectorXd w;    // per-observation weights of the surrogate
  Eigen::VectorXd rw;   // w * (working response - fit) = y - p at pass start
  Eigen::VectorXd nu;   // per-coordinate curvature (1/n) sum w x^2
  std::vector<Eigen::Index> active;
};

// One coordinate minimization of the quadratic surrogate. Returns the step.
inline double cd_update(const Eigen::MatrixXd& x, Eigen::Index j, double lambda,
                        bool penalized, double n, Eigen::VectorXd& beta,
                        Eigen::VectorXd& eta, CdWorkspace& ws) {
  const double nu_j = ws.nu[j];
  if (nu_j <= 0.0) return 0.0;
  const double rho = x.col(j).dot(ws.rw) / n + nu_j * beta[j];
  const double bnew = penalized ? soft_threshold(rho, lambda) / nu_j : rho / nu_j;
  const double step = bnew - beta[j];
  if (step != 0.0) {
    ws.rw -= step * (ws.w.array() * x.col(j).array()).matrix();
    eta += step * x.col(j);
    beta[j] = bnew;
  }
  return step;
}

}  // namespace

FittedModel fit_logistic_lasso(const Dataset& data, double lambda,
                               const LassoOptions& opts) {
  if (!(lambda > 0.0)) throw_validation("fit_logistic_lasso: lambda must be > 0");
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  const double dn = static_cast<double>(n);
  const bool free_intercept = data.has_intercept_column && !opts.penalize_intercept;

  // Optional unit-variance scaling; beta is back-transformed on exit.
  Eigen::MatrixXd scaled_x;
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(p);
  if (opts.standardize) {
    scaled_x = data.x;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double mean = data.x.col(j).mean();
      const double var = (data.x.col(j).array() - mean).square().sum() / dn;
      const double sd = std::sqrt(var);
      if (sd > 1e-12) {
        scale[j] = sd;
        scaled_x.col(j) /= sd;
      }
    }
  }
  // Under standardization the optimized objective (and its KKT certificate)
  // lives on the scaled columns; beta is back-transformed on exit.
  const Eigen::MatrixXd& x = opts.standardize ? scaled_x : data.x;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (opts.warm_start) {
    if (opts.warm_start->size() != p)
      throw_validation("fit_logistic_lasso: warm start has wrong dimension");
    beta = *opts.warm_start;
    if (opts.standardize) beta.array() *= scale.array();
  }

  Eigen::VectorXd eta = x * beta;
  auto objective = [&](const Eigen::VectorXd& b, const Eigen::VectorXd& e) {
    double pen = 0.0;
    for (Eigen::Index j = 0; j < p; ++j)
      if (!(free_intercept && j == 0)) pen += std::abs(b[j]);
    return nll_from_eta(e, data.y) + lambda * pen;
  };

  CdWorkspace ws;
  ws.w.resize(n);
  ws.rw.resize(n);
  ws.nu.resize(p);

  auto run_pass = [&](bool majorizer) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double pi = sigmoid(eta[i]);
      ws.w[i] = majorizer ? 0.25 : std::max(pi * (1.0 - pi), kIrlsWeightFloor);
      ws.rw[i] = data.y[i] - pi;
    }
    if (majorizer)
      ws.nu = (x.colwise().squaredNorm() * (0.25 / dn)).transpose();
    else
      ws.nu =
          ((x.array().square().colwise() * ws.w.array()).colwise().sum() / dn)
              .transpose();
  };

  int updates = 0;
  bool converged = false;
  double fcur = objective(beta, eta);
  const double inner_tol = 0.25 * opts.tol;
  const int max_inner_rounds = 50;

  while (updates < opts.max_iter) {
    if (kkt_residual_raw(x, data.y, beta, lambda, free_intercept) <= opts.tol) {
      converged = true;
      break;
    }
    const Eigen::VectorXd beta_before = beta;
    const Eigen::VectorXd eta_before = eta;
    const double f_before = fcur;

    for (int attempt = 0; attempt < 2; ++attempt) {
      const bool majorizer = attempt == 1;
      run_pass(majorizer);

      ws.active.clear();
      for (Eigen::Index j = 0; j < p; ++j)
        if (beta[j] != 0.0 || (free_intercept && j == 0)) ws.active.push_back(j);

      for (int round = 0; round < max_inner_rounds; ++round) {
        double max_step = 0.0;
        for (int sweep = 0; sweep < 1000; ++sweep) {
          max_step = 0.0;
          for (Eigen::Index j : ws.active) {
            const bool penalized = !(free_intercept && j == 0);
            const double step = cd_update(x, j, lambda, penalized, dn, beta, eta, ws);
            ++updates;
            max_step = std::max(max_step, std::abs(step) * ws.nu[j]);
          }
          if (max_step <= inner_tol || updates >= opts.max_iter) break;
        }
        // full pass over all coordinates; collect entering ones
        bool entered = false;
        double full_max = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
          const bool penalized = !(free_intercept && j == 0);
          const bool was_zero = beta[j] == 0.0 && penalized;
          const double step = cd_update(x, j, lambda, penalized, dn, beta, eta, ws);
          ++updates;
          full_max = std::max(full_max, std::abs(step) * ws.nu[j]);
          if (was_zero && beta[j] != 0.0) {
            ws.active.push_back(j);
            entered = true;
          }
        }
        if ((!entered && full_max <= inner_tol) || updates >= opts.max_iter) break;
      }

      eta = x * beta;  // refresh against incremental drift
      fcur = objective(beta, eta);
      if (fcur <= f_before + 1e-12 * (1.0 + std::abs(f_before))) break;
      if (attempt == 0) {  // IRLS overshoot: retry the pass with the 1/4 bound
        beta = beta_before;
        eta = eta_before;
        fcur = f_before;
      }
    }
    if (opts.objective_trace) opts.objective_trace->push_back(fcur);
    if ((beta - beta_before).cwiseAbs().maxCoeff() == 0.0 && updates < opts.max_iter) {
      // stationary under the surrogate but KKT tol not yet certified;
      // avoid spinning forever on a numerically flat objective
      break;
    }
  }

  FittedModel out;
  out.beta_hat = opts.standardize ? (beta.array() / scale.array()).matrix().eval() : beta;
  out.lambda = lambda;
  out.iterations = updates;
  out.converged = converged ||
                  kkt_residual_raw(x, data.y, beta, lambda, free_intercept) <= opts.tol;
  out.objective_value = objective(beta, x * beta);
  return out;
}

CvResult cross_validate_lambda(const Dataset& data, RngStream& stream,
                               const CvOptions& opts) {
  if (opts.n_folds < 2) throw_validation("cross_validate_lambda: need n_folds >= 2");
  if (data.n() < opts.n_folds)
    throw_validation("cross_validate_lambda: need n >= n_folds");
  if (opts.grid_size < 2) throw_validation("cross_validate_lambda: grid_size >= 2");

  const Eigen::Index n = data.n();
  const int k_folds = opts.n_folds;
  const int grid_size = opts.grid_size;

  const double lambda_max = lasso_lambda_max(data, opts.fit.penalize_intercept);
  Eigen::VectorXd grid(grid_size);
  const double log_ratio = std::log(opts.lambda_min_ratio);
  for (int g = 0; g < grid_size; ++g)
    grid[g] = lambda_max * std::exp(log_ratio * g / (grid_size - 1));

  // seeded Fisher-Yates permutation; observation perm[k] lands in fold k % K
  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const Eigen::Index j =
        static_cast<Eigen::Index>(stream.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  std::vector<int> fold_of(n);
  for (Eigen::Index k = 0; k < n; ++k) fold_of[perm[k]] = static_cast<int>(k % k_folds);

  Eigen::MatrixXd fold_dev(k_folds, grid_size);
  for (int f = 0; f < k_folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (Eigen::Index i = 0; i < n; ++i)
      (fold_of[i] == f ? test : train).push_back(i);

    Dataset dtrain{Eigen::MatrixXd(train.size(), data.p()),
                   Eigen::VectorXd(train.size()), data.has_intercept_column};
    Dataset dtest{Eigen::MatrixXd(test.size(), data.p()), Eigen::VectorXd(test.size()),
                  data.has_intercept_column};
    for (std::size_t r = 0; r < train.size(); ++r) {
      dtrain.x.row(r) = data.x.row(train[r]);
      dtrain.y[r] = data.y[train[r]];
    }
    for (std::size_t r = 0; r < test.size(); ++r) {
      dtest.x.row(r) = data.x.row(test[r]);
      dtest.y[r] = data.y[test[r]];
    }

    LassoOptions fit_opts = opts.fit;
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(data.p());
    for (int g = 0; g < grid_size; ++g) {
      fit_opts.warm_start = warm;
      const FittedModel m = fit_logistic_lasso(dtrain, grid[g], fit_opts);
      warm = m.beta_hat;
      fold_dev(f, g) = neg_log_likelihood(m.beta_hat, dtest);
    }
  }

  CvResult out;
  out.lambda_grid = grid;
  out.cv_deviance.resize(grid_size);
  out.cv_se.resize(grid_size);
  for (int g = 0; g < grid_size; ++g) {
    const double mean = fold_dev.col(g).mean();
    const double var =
        (fold_dev.col(g).array() - mean).square().sum() / (k_folds - 1);
    out.cv_deviance[g] = mean;
    out.cv_se[g] = std::sqrt(var / k_folds);
  }

  int best = 0;
  for (int g = 1; g < grid_size; ++g)
    if (out.cv_deviance[g] < out.cv_deviance[best]) best = g;
  out.lambda_min = grid[best];
  const double cutoff = out.cv_deviance[best] + out.cv_se[best];
  int one_se = best;
  for (int g = 0; g <= best; ++g)
    if (out.cv_deviance[g] <= cutoff) {
      one_se = g;
      break;
    }
  out.lambda_1se = grid[one_se];
  return out;
}

MleFit fit_logistic_mle(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const MleOptions& opts) {
  const Eigen::Index n = x.rows();
  const Eigen::Index q = x.cols();
  if (y.size() != n) throw_validation("fit_logistic_mle: dimension mismatch");
  if (q >= n) throw_validation("fit_logistic_mle: need fewer columns than rows");

  Eigen::VectorXd b = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
  bool converged = false;
  bool separated = false;

  auto weights_at = [&](const Eigen::VectorXd& e) {
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double pi = sigmoid(e[i]);
      w[i] = pi * (1.0 - pi);
    }
    return w;
  };

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (eta.cwiseAbs().maxCoeff() > opts.separation_bound) {
      separated = true;
      break;
    }
    Eigen::VectorXd resid(n);
    for (Eigen::Index i = 0; i < n; ++i) resid[i] = y[i] - sigmoid(eta[i]);
    const Eigen::VectorXd grad = x.transpose() * resid;
    if (grad.cwiseAbs().maxCoeff() / static_cast<double>(n) <= opts.tol) {
      converged = true;
      break;
    }

    const Eigen::VectorXd w = weights_at(eta);
    const Eigen::MatrixXd hess =
        x.transpose() * w.asDiagonal() * x;  // observed information
    Eigen::LLT<Eigen::MatrixXd> llt(hess);
    bool singular = llt.info() != Eigen::Success;
    if (!singular) {
      const Eigen::VectorXd d = llt.matrixLLT().diagonal();
      if (d.minCoeff() <= 0.0 ||
          d.minCoeff() * d.minCoeff() < 1e-12 * d.maxCoeff() * d.maxCoeff())
        singular = true;
    }
    if (singular) {
      separated = true;  // numerically singular information before convergence
      break;
    }
    const Eigen::VectorXd delta = llt.solve(grad);

    // step halving on the likelihood
    const double nll_old = nll_from_eta(eta, y);
    double t = 1.0;
    Eigen::VectorXd eta_new = eta + x * delta;
    while (t > 1e-8 && nll_from_eta(eta_new, y) > nll_old) {
      t *= 0.5;
      eta_new = eta + t * (x * delta);
    }
    b += t * delta;
    eta = eta_new;
  }

  MleFit out;
  out.coefficients = b;
  out.converged = converged;
  out.separation_detected = separated;

  const Eigen::VectorXd w = weights_at(eta);
  const Eigen::MatrixXd hess = x.transpose() * w.asDiagonal() * x;
  Eigen::LLT<Eigen::MatrixXd> llt(hess);
  if (llt.info() != Eigen::Success)
    throw_numerical("SingularHessian: X'WX not invertible at the final iterate");
  out.covariance = llt.solve(Eigen::MatrixXd::Identity(q, q));
  return out;
}

}  // namespace live
