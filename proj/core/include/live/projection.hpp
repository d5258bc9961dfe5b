#pragma once

#include <optional>
#include <Eigen/Core>

#include "live/types.hpp"

namespace live {

/// Sample second-moment matrix (1/n) sum_i X_i X_i'.
struct Gram {
  Eigen::MatrixXd sigma_hat;
  Eigen::Index n = 0;
  Eigen::Index p() const { return sigma_hat.rows(); }
};

Gram sample_gram(const Dataset& data);

struct DualOptions {
  int max_sweeps = 20000;
  double tol = 1e-9;  // stationarity residual of the dual, gradient units
  double objective_floor_scale = 1e6;  // divergence: obj < -scale*(1+||b||^2)
  double iterate_bound = 1e8;          // divergence: ||v||_inf above this
  // recession-ramp exit: after ramp_rounds rounds whose objective decrement
  // stopped decaying (ratio above ramp_decay), a run that cannot reach the
  // divergence floor within the sweep budget is declared infinite
  int ramp_rounds = 8;
  double ramp_decay = 0.97;
  std::optional<Eigen::VectorXd> warm_start;
};

struct DualSolution {
  Eigen::VectorXd v;  // length p+1, on the unit-loading scale
  bool finite = true;
  bool converged = false;
  double objective = 0.0;
  int sweeps = 0;
};

/// Cyclic coordinate descent on the dual of the projection program,
///   min_v (1/4) v' H' Sigma H v + b' H v + mu ||v||_1,
/// with H = [b, I] and b = x*/||x*||_2. Hv = v_1 b + v_{-1} is kept
/// analytically, so the (p+1)x(p+1) quadratic form is never materialized;
/// the running products Hv and Sigma(Hv) are updated per coordinate.
/// The solution depends on x* only through b. finite = false is the
/// divergence certificate (objective below the floor or iterate blow-up);
/// a run that exhausts max_sweeps with neither certificate throws a
/// numerical Error ("NonConvergence").
DualSolution solve_projection_dual(const Gram& gram, const Loading& x_star,
                                   double mu, const DualOptions& opts = {});

struct MuSearchOptions {
  double floor = 1e-4;
  double ceiling = 1e3;
  double bisect_rel_width = 0.1;
  int probe_sweeps = 2500;  // per-probe sweep budget during the search
  double lambda_n = 0.0;    // start point scale; 0 = sqrt(2 log p / n)
  DualOptions dual;
};

/// Smallest dual penalty with a finite minimum. Starts at 0.5*lambda_n,
/// halves while finite down to the floor, doubles up to the ceiling when the
/// start diverges, then bisects the bracket to the requested relative width.
/// Throws "NoFiniteMu" when the ceiling still diverges.
double select_mu(const Gram& gram, const Loading& x_star,
                 const MuSearchOptions& opts = {});

struct ProjectionDirection {
  Eigen::VectorXd u_hat;
  double mu = 0.0;
  Eigen::VectorXd dual_v;  // ||x*||_2 times the unit-scale dual vector
  double linf_residual = 0.0;     // ||Sigma u - x*||_inf
  double loading_residual = 0.0;  // |x*' Sigma u - ||x*||^2|
  double lambda_n = 0.0;          // level at which the certificate was checked
  bool feasible = false;
  int relaxations = 0;  // times lambda_n was inflated by relax_factor
};

struct ProjectionOptions {
  double slack_tol = 1e-6;
  int max_relaxations = 5;
  double relax_factor = 1.25;
  MuSearchOptions mu_search;
};

/// sqrt(2 log p / n)
double default_lambda_n(Eigen::Index n, Eigen::Index p);

/// Full construction: selects mu, solves the dual, recovers
/// u = -(v_{-1} + v_1 b)/2 on the x* scale and certifies feasibility of the
/// two residual constraints at lambda_n, relaxing lambda_n by relax_factor up
/// to max_relaxations times before returning the best effort flagged
/// infeasible.
ProjectionDirection projection_direction(const Gram& gram, const Loading& x_star,
                                         const ProjectionOptions& opts = {},
                                         const Dataset* data = nullptr);

ProjectionDirection projection_direction(const Dataset& data, const Loading& x_star,
                                         const ProjectionOptions& opts = {});

}  // namespace live
