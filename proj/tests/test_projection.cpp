#include <doctest.h>

#include <cmath>

#include "live/numerics.hpp"
#include "live/projection.hpp"
#include "live/simulation.hpp"
#include "oracles.hpp"

using live::Dataset;
using live::Gram;
using live::Loading;
using live::RngStream;

namespace {

Loading basis_loading(Eigen::Index p, Eigen::Index j) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
  v[j] = 1.0;
  return Loading{v};
}

Gram identity_gram(Eigen::Index p, Eigen::Index n) {
  return Gram{Eigen::MatrixXd::Identity(p, p), n};
}

// stationarity of the unit-scale dual: |[H'(Sigma u_unit - b)]_j| <= mu + tol,
// with near-equality on the active coordinates
void check_dual_stationarity(const Gram& gram, const Loading& x_star,
                             const live::ProjectionDirection& dir, double tol) {
  const Eigen::Index p = gram.p();
  const double norm = x_star.norm();
  const Eigen::VectorXd b = x_star.values / norm;
  const Eigen::VectorXd u_unit = dir.u_hat / norm;
  const Eigen::VectorXd resid = gram.sigma_hat * u_unit - b;
  Eigen::VectorXd hr(p + 1);
  hr[0] = b.dot(resid);
  hr.tail(p) = resid;
  for (Eigen::Index j = 0; j <= p; ++j) {
    CHECK(std::abs(hr[j]) <= dir.mu + tol);
    if (std::abs(dir.dual_v[j]) > 1e-9 * norm)
      CHECK(std::abs(std::abs(hr[j]) - dir.mu) <= tol);
  }
}

}  // namespace

TEST_CASE("sample_gram: identity rows, hand arithmetic, brute force") {
  SUBCASE("orthonormal rows give (1/n) I") {
    Dataset d;
    d.x = Eigen::MatrixXd::Identity(4, 4);
    d.y = Eigen::VectorXd::Zero(4);
    d.y[0] = 1.0;
    const Gram g = live::sample_gram(d);
    CHECK((g.sigma_hat - 0.25 * Eigen::MatrixXd::Identity(4, 4))
              .cwiseAbs()
              .maxCoeff() < 1e-15);
  }
  SUBCASE("n=2 hand example") {
    Dataset d;
    d.x.resize(2, 2);
    d.x << 1, 2, 3, 4;
    d.y.resize(2);
    d.y << 0, 1;
    const Gram g = live::sample_gram(d);
    CHECK(g.sigma_hat(0, 0) == doctest::Approx(5.0));
    CHECK(g.sigma_hat(0, 1) == doctest::Approx(7.0));
    CHECK(g.sigma_hat(1, 0) == doctest::Approx(7.0));
    CHECK(g.sigma_hat(1, 1) == doctest::Approx(10.0));
  }
  SUBCASE("matches the brute-force double loop") {
    RngStream stream(3, 0);
    Dataset d;
    d.x.resize(50, 20);
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 20; ++j) d.x(i, j) = stream.next_gaussian();
    d.y = Eigen::VectorXd::Zero(50);
    d.y[0] = 1.0;
    const Gram g = live::sample_gram(d);
    Eigen::MatrixXd brute = Eigen::MatrixXd::Zero(20, 20);
    for (int i = 0; i < 50; ++i)
      brute += d.x.row(i).transpose() * d.x.row(i);
    brute /= 50.0;
    CHECK((g.sigma_hat - brute).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("dual solve on the identity gram matches the analytic minimizer") {
  const Eigen::Index p = 5;
  const Gram gram = identity_gram(p, 100);
  const Loading e1 = basis_loading(p, 0);
  const double mu = 0.05;
  const live::DualSolution sol = live::solve_projection_dual(gram, e1, mu);
  CHECK(sol.finite);
  CHECK(sol.converged);

  const Eigen::VectorXd b = e1.values;
  const Eigen::VectorXd u = -0.5 * (sol.v.tail(p) + sol.v[0] * b);
  // identity covariance: u = (1 - mu) e1
  CHECK(std::abs(u[0] - (1.0 - mu)) < 1e-4);
  for (Eigen::Index j = 1; j < p; ++j) CHECK(std::abs(u[j]) < 1e-8);

  const Eigen::VectorXd oracle = oracles::diagonal_projection_oracle(
      Eigen::VectorXd::Ones(p), e1.values, mu, mu);
  CHECK((u - oracle).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("dual diverges on a rank-deficient gram with small mu") {
  const Eigen::Index p = 6;
  Dataset d;
  d.x.resize(2, p);
  d.x.row(0) << 1, 1, 0, 0, 0, 0;
  d.x.row(1) << 1, 1, 0, 0, 0, 0;
  d.y.resize(2);
  d.y << 0, 1;
  const Gram gram = live::sample_gram(d);  // rank 1
  Eigen::VectorXd xs(p);
  xs << 0, 0, 1, 0.5, 0, 0;  // outside the column space
  const live::DualSolution sol =
      live::solve_projection_dual(gram, Loading{xs}, 1e-3);
  CHECK_FALSE(sol.finite);
}

TEST_CASE("dual solution depends on the loading only through b") {
  RngStream stream(5, 0);
  const Eigen::Index p = 8;
  Dataset d;
  d.x.resize(40, p);
  for (int i = 0; i < 40; ++i)
    for (Eigen::Index j = 0; j < p; ++j) d.x(i, j) = stream.next_gaussian();
  d.y = Eigen::VectorXd::Zero(40);
  d.y[0] = 1.0;
  const Gram gram = live::sample_gram(d);

  Eigen::VectorXd xs(p);
  for (Eigen::Index j = 0; j < p; ++j) xs[j] = stream.next_gaussian();
  const live::DualSolution a = live::solve_projection_dual(gram, Loading{xs}, 0.1);
  // power-of-two scaling keeps b bit-identical
  const live::DualSolution b4 =
      live::solve_projection_dual(gram, Loading{(4.0 * xs).eval()}, 0.1);
  CHECK(a.v == b4.v);
  const live::DualSolution b7 =
      live::solve_projection_dual(gram, Loading{(7.0 * xs).eval()}, 0.1);
  CHECK((a.v - b7.v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("select_mu: positive definite gram returns the floor") {
  const Gram gram = identity_gram(6, 50);
  const Loading e2 = basis_loading(6, 1);
  const double mu = live::select_mu(gram, e2);
  CHECK(mu == doctest::Approx(1e-4));
  CHECK(live::select_mu(gram, e2) == mu);  // deterministic
}

TEST_CASE("select_mu brackets the finiteness boundary on singular grams") {
  // rank-1 gram, loading outside the column space
  const Eigen::Index p = 6;
  Dataset d;
  d.x.resize(2, p);
  d.x.row(0) << 1, 0.5, 0.25, 0, 0, 0;
  d.x.row(1) << 1, 0.5, 0.25, 0, 0, 0;
  d.y.resize(2);
  d.y << 0, 1;
  const Gram gram = live::sample_gram(d);
  Eigen::VectorXd xs(p);
  xs << 0, 0, 0, 1, 1, 0.5;
  const Loading loading{xs};
  const double mu = live::select_mu(gram, loading);
  CHECK(mu > 1e-4);
  CHECK(live::solve_projection_dual(gram, loading, mu).finite);
  CHECK_FALSE(live::solve_projection_dual(gram, loading, mu / 1.1).finite);
}

TEST_CASE("projection_direction on a near-identity design") {
  RngStream stream(7, 0);
  const int n = 2000, p = 20;
  Dataset d;
  d.x.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) d.x(i, j) = stream.next_gaussian();
  d.y = Eigen::VectorXd::Zero(n);
  d.y[0] = 1.0;

  const Loading e1 = basis_loading(p, 0);
  const live::ProjectionDirection dir = live::projection_direction(d, e1);
  CHECK(dir.feasible);
  CHECK(dir.relaxations == 0);
  const double lambda_n = live::default_lambda_n(n, p);
  CHECK(dir.lambda_n == doctest::Approx(lambda_n));
  // under identity covariance, Sigma^-1 x* = x*
  CHECK(std::abs(dir.u_hat[0] - 1.0) < 3.0 * lambda_n);
  for (int j = 1; j < p; ++j) CHECK(std::abs(dir.u_hat[j]) < 3.0 * lambda_n);

  SUBCASE("primal recovery identity and stationarity") {
    const Eigen::VectorXd b = e1.values;
    const Eigen::VectorXd recovered =
        -0.5 * (dir.dual_v.tail(p) + dir.dual_v[0] * b);
    CHECK((dir.u_hat - recovered).cwiseAbs().maxCoeff() == 0.0);
    check_dual_stationarity(live::sample_gram(d), e1, dir, 1e-6);
  }
  SUBCASE("certificate honesty") {
    const Gram gram = live::sample_gram(d);
    const Eigen::VectorXd su = gram.sigma_hat * dir.u_hat;
    const double linf = (su - e1.values).cwiseAbs().maxCoeff();
    const double load = std::abs(e1.values.dot(su) - 1.0);
    CHECK(std::abs(linf - dir.linf_residual) < 1e-12);
    CHECK(std::abs(load - dir.loading_residual) < 1e-12);
  }
}

TEST_CASE("projection direction scales linearly in the loading") {
  RngStream stream(11, 0);
  const int n = 150, p = 12;
  Dataset d;
  d.x.resize(n, p);
  for (int i = 0; i < n; ++i) {
    d.x(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) d.x(i, j) = stream.next_gaussian();
  }
  d.y = Eigen::VectorXd::Zero(n);
  d.y[0] = 1.0;

  Eigen::VectorXd xs(p);
  for (int j = 0; j < p; ++j) xs[j] = stream.next_gaussian();
  const live::ProjectionDirection d1 = live::projection_direction(d, Loading{xs});
  const live::ProjectionDirection d7 =
      live::projection_direction(d, Loading{(7.0 * xs).eval()});
  CHECK((d7.u_hat - 7.0 * d1.u_hat).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("paper-scale feasibility audit and variance bracket (reduced)") {
  // desk-scale version of the Monte-Carlo audit; the full n=200, p=501 run
  // lives in the acceptance suite
  const int p = 101, n = 80, reps = 20;
  const Eigen::VectorXd beta =
      live::gen_beta(live::BetaSpec{live::BetaSpec::Kind::exact_sparse, 2.0, 0.0}, p);
  const live::LowerTriangular chol =
      live::cholesky(live::make_ar_covariance(p - 1, 0.5));
  RngStream loading_stream(99, live::kLoadingStreamIndex);
  const Loading x_star = live::gen_loading(
      live::LoadingSpec{live::LoadingSpec::Kind::loading1, 1.0 / 25.0}, p,
      loading_stream);

  int feasible = 0;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream stream(99, rep);
    const Dataset d = live::gen_dataset(n, beta, chol, stream);
    const Gram gram = live::sample_gram(d);
    const live::ProjectionDirection dir =
        live::projection_direction(gram, x_star);
    if (dir.feasible && dir.relaxations == 0) ++feasible;

    const double ratio =
        std::sqrt(dir.u_hat.dot(gram.sigma_hat * dir.u_hat) / n) /
        (x_star.norm() / std::sqrt(static_cast<double>(n)));
    CHECK(ratio > 0.1);
    CHECK(ratio < 10.0);
  }
  CHECK(feasible >= static_cast<int>(0.9 * reps));
}
