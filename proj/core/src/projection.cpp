#include "live/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "live/log.hpp"

namespace live {

Gram sample_gram(const Dataset& data) {
  if (data.n() < 1) throw_validation("sample_gram: need n >= 1");
  Gram g;
  g.n = data.n();
  g.sigma_hat = data.x.transpose() * data.x / static_cast<double>(data.n());
  g.sigma_hat = ((g.sigma_hat + g.sigma_hat.transpose()) * 0.5).eval();
  return g;
}

double default_lambda_n(Eigen::Index n, Eigen::Index p) {
  return std::sqrt(2.0 * std::log(static_cast<double>(p)) / static_cast<double>(n));
}

namespace {

inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

}  // namespace

DualSolution solve_projection_dual(const Gram& gram, const Loading& x_star,
                                   double mu, const DualOptions& opts) {
  if (!(mu > 0.0)) throw_validation("solve_projection_dual: mu must be > 0");
  const Eigen::Index p = gram.p();
  if (x_star.values.size() != p)
    throw_validation("solve_projection_dual: loading dimension mismatch");
  const Eigen::MatrixXd& sig = gram.sigma_hat;
  const Eigen::VectorXd b = x_star.values / x_star.norm();

  const Eigen::VectorXd sig_b = sig * b;
  const double b_sig_b = b.dot(sig_b);
  const Eigen::VectorXd diag = sig.diagonal();
  const double divergence_floor =
      -opts.objective_floor_scale * (1.0 + b.squaredNorm());

  // v[0] multiplies b, v[1..p] is v_{-1}; m = Hv and s = Sigma m are
  // maintained incrementally (O(p) per moved coordinate).
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p + 1);
  if (opts.warm_start && opts.warm_start->size() == p + 1) v = *opts.warm_start;
  Eigen::VectorXd m = v[0] * b + v.tail(p);
  Eigen::VectorXd s = sig * m;

  DualSolution out;
  out.finite = true;

  auto objective = [&]() { return 0.25 * m.dot(s) + b.dot(m) + mu * v.lpNorm<1>(); };

  // One coordinate minimization; returns the step size in gradient units.
  auto update = [&](Eigen::Index j) -> double {
    const double quarter_curv = (j == 0 ? b_sig_b : diag[j - 1]) * 0.25;
    const double vj = v[j];
    double lin;  // gradient of the smooth part at v_j = 0
    if (j == 0)
      lin = 0.5 * (b.dot(s) - vj * b_sig_b) + 1.0;
    else
      lin = 0.5 * (s[j - 1] - vj * diag[j - 1]) + b[j - 1];
    if (quarter_curv <= 0.0) {
      // flat coordinate: the penalty either pins it at zero or the dual is
      // unbounded along it
      if (std::abs(lin) > mu) {
        out.finite = false;
        return 0.0;
      }
      if (vj != 0.0) {
        v[j] = 0.0;
        if (j == 0) {
          m -= vj * b;
          s -= vj * sig_b;
        } else {
          m[j - 1] -= vj;
          s -= vj * sig.col(j - 1);
        }
      }
      return 0.0;
    }
    const double vnew = soft_threshold(-lin, mu) / (2.0 * quarter_curv);
    const double step = vnew - vj;
    if (step != 0.0) {
      v[j] = vnew;
      if (j == 0) {
        m += step * b;
        s += step * sig_b;
      } else {
        m[j - 1] += step;
        s += step * sig.col(j - 1);
      }
    }
    return std::abs(step) * 2.0 * quarter_curv;
  };

  auto diverged = [&](double f) {
    return f < divergence_floor || v.cwiseAbs().maxCoeff() > opts.iterate_bound;
  };

  std::vector<Eigen::Index> active;
  Eigen::VectorXd v_window = v;
  int sweeps = 0;
  int outer = 0;
  // descent-ramp detection: a recession escape keeps a near-constant
  // per-round decrement while a convergent run's decrement decays
  double f_prev_round = objective();
  double prev_decrement = std::numeric_limits<double>::infinity();
  int ramp_rounds = 0;

  while (sweeps < opts.max_sweeps) {
    ++outer;
    active.clear();
    for (Eigen::Index j = 0; j <= p; ++j)
      if (v[j] != 0.0) active.push_back(j);
    for (int it = 0; it < 100 && sweeps < opts.max_sweeps && !active.empty(); ++it) {
      double max_res = 0.0;
      for (Eigen::Index j : active) max_res = std::max(max_res, update(j));
      ++sweeps;
      if (!out.finite) break;
      if (diverged(objective())) {
        out.finite = false;
        break;
      }
      if (max_res <= opts.tol) break;
    }
    if (!out.finite) break;

    // full cyclic pass 0..p certifies stationarity over all coordinates
    double max_res = 0.0;
    for (Eigen::Index j = 0; j <= p; ++j) max_res = std::max(max_res, update(j));
    ++sweeps;
    if (!out.finite) break;
    double f = objective();
    if (diverged(f)) {
      out.finite = false;
      break;
    }
    if (max_res <= opts.tol) {
      out.converged = true;
      break;
    }

    if (outer % 50 == 0) s = sig * m;  // drift hygiene

    // Ray step along the progress direction of the last round. On an
    // unbounded dual this reaches the divergence floor in a few doublings
    // instead of thousands of sweeps; on a bounded one it occasionally
    // shortcuts a flat valley.
    const Eigen::VectorXd d = v - v_window;
    if (d.cwiseAbs().maxCoeff() > 0.0) {
      const Eigen::VectorXd hd = d[0] * b + d.tail(p);
      const Eigen::VectorXd sig_hd = sig * hd;
      const double q = 0.25 * hd.dot(sig_hd);
      const double l = 0.25 * (m.dot(sig_hd) + hd.dot(s)) + b.dot(hd);
      double best_t = 0.0, best_f = f;
      for (double t = 1.0; t <= 1e18; t *= 2.0) {
        const double ft =
            f + q * t * t + l * t + mu * ((v + t * d).lpNorm<1>() - v.lpNorm<1>());
        if (!(ft < best_f)) break;
        best_f = ft;
        best_t = t;
        if (best_f < divergence_floor) break;
      }
      if (best_t > 0.0) {
        v += best_t * d;
        m += best_t * hd;
        s += best_t * sig_hd;
        f = objective();
        if (diverged(f)) {
          out.finite = false;
          break;
        }
      }
    }
    v_window = v;

    const double decrement = f_prev_round - f;
    f_prev_round = f;
    if (opts.ramp_rounds > 0 && decrement > 0.0 &&
        decrement > opts.ramp_decay * prev_decrement) {
      // decrement not decaying: count rounds on the ramp and extrapolate
      if (++ramp_rounds >= opts.ramp_rounds) {
        const double rounds_to_floor = (f - divergence_floor) / decrement;
        if (rounds_to_floor * 2.0 >
            static_cast<double>(opts.max_sweeps - sweeps)) {
          out.finite = false;  // descending a recession ramp it cannot finish
          break;
        }
      }
    } else {
      ramp_rounds = 0;
    }
    prev_decrement = decrement;
  }

  out.v = v;
  out.objective = objective();
  out.sweeps = sweeps;
  if (out.finite && !out.converged && sweeps >= opts.max_sweeps)
    throw_numerical("NonConvergence: projection dual did not reach tol in " +
                    std::to_string(opts.max_sweeps) + " sweeps (mu=" +
                    std::to_string(mu) + ")");
  return out;
}

namespace {

enum class ProbeOutcome { finite, infinite };

struct Probe {
  ProbeOutcome outcome;
  DualSolution solution;  // meaningful when finite
};

// Probe classification: converged -> finite; divergence certificate or ramp
// exit -> infinite; budget exhausted undecided -> infinite (conservative;
// the feasibility certificate downstream stays the arbiter).
Probe probe_mu(const Gram& gram, const Loading& x_star, double mu,
               const DualOptions& base, int budget,
               const std::optional<Eigen::VectorXd>& warm) {
  DualOptions opts = base;
  opts.max_sweeps = budget;
  opts.warm_start = warm;
  try {
    DualSolution sol = solve_projection_dual(gram, x_star, mu, opts);
    if (sol.finite && sol.converged) return Probe{ProbeOutcome::finite, std::move(sol)};
    return Probe{ProbeOutcome::infinite, {}};
  } catch (const Error&) {
    return Probe{ProbeOutcome::infinite, {}};
  }
}

struct MuSelection {
  double mu = 0.0;
  DualSolution solution;
};

MuSelection select_mu_impl(const Gram& gram, const Loading& x_star,
                           const MuSearchOptions& opts, double lambda_n) {
  const double mu0 = std::clamp(0.5 * lambda_n, opts.floor, opts.ceiling);

  std::optional<Eigen::VectorXd> warm;
  DualSolution best_solution;
  double best_mu = 0.0;
  auto finite_at = [&](double mu) {
    Probe pr = probe_mu(gram, x_star, mu, opts.dual, opts.probe_sweeps, warm);
    if (pr.outcome == ProbeOutcome::finite) {
      warm = pr.solution.v;
      best_solution = std::move(pr.solution);
      best_mu = mu;
      return true;
    }
    return false;
  };

  double lo_infinite = 0.0;  // largest known-divergent mu (0 = none known)
  double hi_finite = 0.0;    // smallest known-finite mu

  if (finite_at(mu0)) {
    hi_finite = mu0;
    double mu = mu0 * 0.5;
    while (mu >= opts.floor) {
      if (finite_at(mu)) {
        hi_finite = mu;
        mu *= 0.5;
      } else {
        lo_infinite = mu;
        break;
      }
    }
    if (lo_infinite == 0.0) {
      if (hi_finite > opts.floor && finite_at(opts.floor))
        return MuSelection{opts.floor, std::move(best_solution)};
      if (best_mu == opts.floor || hi_finite <= opts.floor)
        return MuSelection{hi_finite, std::move(best_solution)};
      lo_infinite = opts.floor;
    }
  } else {
    lo_infinite = mu0;
    double mu = mu0 * 2.0;
    while (mu <= opts.ceiling) {
      if (finite_at(mu)) {
        hi_finite = mu;
        break;
      }
      lo_infinite = mu;
      mu *= 2.0;
    }
    if (hi_finite == 0.0) {
      if (lo_infinite < opts.ceiling && finite_at(opts.ceiling))
        hi_finite = opts.ceiling;
      else
        throw_numerical("NoFiniteMu: dual diverges even at mu = " +
                        std::to_string(opts.ceiling));
    }
  }

  while (hi_finite / lo_infinite > 1.0 + opts.bisect_rel_width) {
    const double mid = std::sqrt(hi_finite * lo_infinite);
    if (finite_at(mid))
      hi_finite = mid;
    else
      lo_infinite = mid;
  }
  if (best_mu != hi_finite) finite_at(hi_finite);  // refresh the stored solve
  return MuSelection{hi_finite, std::move(best_solution)};
}

}  // namespace

double select_mu(const Gram& gram, const Loading& x_star,
                 const MuSearchOptions& opts) {
  const double lambda_n = opts.lambda_n > 0.0
                              ? opts.lambda_n
                              : default_lambda_n(gram.n, gram.p());
  return select_mu_impl(gram, x_star, opts, lambda_n).mu;
}

ProjectionDirection projection_direction(const Gram& gram, const Loading& x_star,
                                         const ProjectionOptions& opts,
                                         const Dataset* data) {
  const Eigen::Index p = gram.p();
  if (x_star.values.size() != p)
    throw_validation("projection_direction: loading dimension mismatch");

  {
    const Eigen::VectorXd d = gram.sigma_hat.diagonal();
    double dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < p; ++j)
      if (d[j] > 0.0) dmin = std::min(dmin, d[j]);
    if (std::isfinite(dmin) && d.maxCoeff() > 10.0 * dmin)
      log::info("projection: diag(Sigma) varies by more than 10x; lambda_n is "
                "not rescaled for heteroscedastic columns");
  }

  const double norm = x_star.norm();
  const Eigen::VectorXd b = x_star.values / norm;
  const double lambda_default = default_lambda_n(gram.n, p);

  ProjectionDirection best;
  double lambda_n = lambda_default;
  for (int attempt = 0; attempt <= opts.max_relaxations; ++attempt) {
    const MuSelection sel = select_mu_impl(gram, x_star, opts.mu_search, lambda_n);

    ProjectionDirection dir;
    dir.mu = sel.mu;
    dir.dual_v = norm * sel.solution.v;
    dir.u_hat = -0.5 * (dir.dual_v.tail(p) + dir.dual_v[0] * b);
    const Eigen::VectorXd su = gram.sigma_hat * dir.u_hat;
    dir.linf_residual = (su - x_star.values).cwiseAbs().maxCoeff();
    dir.loading_residual = std::abs(x_star.values.dot(su) - norm * norm);
    dir.lambda_n = lambda_n;
    dir.relaxations = attempt;
    dir.feasible =
        dir.linf_residual <= norm * lambda_n * (1.0 + opts.slack_tol) &&
        dir.loading_residual <= norm * norm * lambda_n * (1.0 + opts.slack_tol);

    if (attempt == 0 || dir.linf_residual < best.linf_residual) best = dir;
    if (dir.feasible) {
      best = dir;
      break;
    }
    lambda_n *= opts.relax_factor;
  }

  if (!best.feasible)
    log::info("projection: feasibility certificate not met after " +
              std::to_string(opts.max_relaxations) + " relaxations (linf " +
              std::to_string(best.linf_residual) + ")");
  if (data != nullptr && log::level() >= log::Level::debug) {
    const double xu_inf = (data->x * best.u_hat).cwiseAbs().maxCoeff();
    log::debug("projection: ||X u||_inf = " + std::to_string(xu_inf) +
               " (dropped third constraint diagnostic)");
  }
  return best;
}

ProjectionDirection projection_direction(const Dataset& data, const Loading& x_star,
                                         const ProjectionOptions& opts) {
  const Gram gram = sample_gram(data);
  return projection_direction(gram, x_star, opts, &data);
}

}  // namespace live
