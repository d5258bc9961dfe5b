#include <doctest.h>

#include <cmath>

#include "live/baselines.hpp"
#include "live/inference.hpp"
#include "live/simulation.hpp"
#include "oracles.hpp"

using live::Dataset;
using live::Loading;
using live::RngStream;

namespace {

// the spec's hand-computed two-observation instance
struct HandInstance {
  Dataset data;
  live::FittedModel model;
  live::ProjectionDirection direction;
  Loading x_star;
  HandInstance() {
    data.x.resize(2, 1);
    data.x << 1, -1;
    data.y.resize(2);
    data.y << 1, 0;
    data.has_intercept_column = false;
    model.beta_hat = Eigen::VectorXd::Zero(1);
    direction.u_hat = Eigen::VectorXd::Ones(1);
    x_star.values = Eigen::VectorXd::Ones(1);
  }
};

}  // namespace

TEST_CASE("hand-computed estimate and variance") {
  HandInstance inst;
  const live::Weights w =
      live::linearization_weights(inst.data, inst.model.beta_hat, 1e-4);
  CHECK(w.w[0] == 0.25);
  CHECK(w.clamped_count == 0);
  CHECK(live::live_linear_estimate(inst.data, inst.model, inst.direction,
                                   inst.x_star, w) == doctest::Approx(2.0));
  CHECK(live::live_variance(inst.data, inst.direction, w) == doctest::Approx(2.0));
}

TEST_CASE("zero direction gives the plug-in estimate and zero variance") {
  HandInstance inst;
  inst.direction.u_hat.setZero();
  inst.model.beta_hat[0] = 0.7;
  const live::Weights w =
      live::linearization_weights(inst.data, inst.model.beta_hat, 1e-4);
  CHECK(live::live_linear_estimate(inst.data, inst.model, inst.direction,
                                   inst.x_star, w) == doctest::Approx(0.7));
  CHECK(live::live_variance(inst.data, inst.direction, w) == 0.0);
}

TEST_CASE("case_probability is the logistic map and monotone") {
  CHECK(live::case_probability(0.0) == 0.5);
  double prev = 0.0;
  for (double est = -6.0; est <= 6.0; est += 0.5) {
    const double p = live::case_probability(est);
    CHECK(p > prev);
    prev = p;
  }
}

TEST_CASE("confidence interval: degenerate, oracle value, range") {
  SUBCASE("zero variance collapses the interval") {
    const auto [lo, hi] = live::confidence_interval(0.8, 0.0, 0.05);
    CHECK(lo == hi);
    CHECK(lo == doctest::Approx(live::sigmoid(0.8)));
  }
  SUBCASE("est=0, V=1, alpha=0.05") {
    const auto [lo, hi] = live::confidence_interval(0.0, 1.0, 0.05);
    CHECK(lo == doctest::Approx(0.12348).epsilon(1e-4));
    CHECK(hi == doctest::Approx(0.87652).epsilon(1e-4));
  }
  SUBCASE("endpoints stay in [0,1] and ordered") {
    RngStream stream(3, 3);
    for (int k = 0; k < 200; ++k) {
      const double est = 10.0 * stream.next_gaussian();
      const double var = std::abs(stream.next_gaussian());
      const double alpha = 0.01 + 0.98 * stream.next_uniform();
      const auto [lo, hi] = live::confidence_interval(est, var, alpha);
      CHECK(lo >= 0.0);
      CHECK(hi <= 1.0);
      CHECK(lo <= hi);
    }
  }
  SUBCASE("monotone image of the linear-scale interval, exactly") {
    const double est = 0.37, var = 0.41, alpha = 0.1;
    const auto [lo, hi] = live::confidence_interval(est, var, alpha);
    const double z = live::std_normal_quantile(1.0 - alpha / 2.0);
    CHECK(lo == live::sigmoid(est - z * std::sqrt(var)));
    CHECK(hi == live::sigmoid(est + z * std::sqrt(var)));
  }
}

TEST_CASE("case label test: values and p-value consistency") {
  SUBCASE("c*=1/2, est=0") {
    const live::TestDecision t = live::case_label_test(0.0, 1.0, 0.05, 0.5);
    CHECK(t.p_value == doctest::Approx(0.5));
    CHECK_FALSE(t.reject);
  }
  SUBCASE("est=2, V=1") {
    const live::TestDecision t = live::case_label_test(2.0, 1.0, 0.05, 0.5);
    CHECK(t.reject);
    CHECK(t.p_value == doctest::Approx(1.0 - oracles::normal_cdf(2.0)).epsilon(1e-6));
  }
  SUBCASE("zero variance is an error") {
    CHECK_THROWS_AS(live::case_label_test(1.0, 0.0, 0.05, 0.5), live::Error);
  }
  SUBCASE("reject iff p <= alpha on random tuples") {
    RngStream stream(5, 5);
    for (int k = 0; k < 1000; ++k) {
      const double est = 4.0 * stream.next_gaussian();
      const double var = 0.01 + std::abs(stream.next_gaussian());
      const double alpha = 0.01 + 0.9 * stream.next_uniform();
      const double c = 0.05 + 0.9 * stream.next_uniform();
      const live::TestDecision t = live::case_label_test(est, var, alpha, c);
      CHECK(t.reject == (t.p_value <= alpha));
    }
  }
}

TEST_CASE("weight clamp transparency") {
  RngStream stream(7, 1);
  Dataset d;
  const int n = 60, p = 4;
  d.has_intercept_column = true;
  d.x.resize(n, p);
  d.y.resize(n);
  Eigen::VectorXd beta(p);
  beta << 0.2, 0.5, -0.4, 0.3;  // |eta| stays small: well-conditioned weights
  for (int i = 0; i < n; ++i) {
    d.x(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) d.x(i, j) = 0.5 * stream.next_gaussian();
    d.y[i] = stream.next_uniform() < live::sigmoid(d.x.row(i).dot(beta)) ? 1 : 0;
  }
  live::FittedModel model;
  model.beta_hat = beta;
  live::ProjectionDirection dir;
  dir.u_hat = Eigen::VectorXd::Ones(p);
  Loading xs;
  xs.values = Eigen::VectorXd::Ones(p);

  const live::Weights clamped = live::linearization_weights(d, beta, 1e-4);
  const live::Weights raw = live::linearization_weights(d, beta, 0.0);
  CHECK(clamped.clamped_count == 0);
  const double est_c = live::live_linear_estimate(d, model, dir, xs, clamped);
  const double est_r = live::live_linear_estimate(d, model, dir, xs, raw);
  CHECK(std::abs(est_c - est_r) < 1e-10);
  CHECK(std::abs(live::live_variance(d, dir, clamped) -
                 live::live_variance(d, dir, raw)) < 1e-10);
}

TEST_CASE("full pipeline is deterministic and scale-equivariant") {
  const int p = 21, n = 150;
  const Eigen::VectorXd beta =
      live::gen_beta(live::BetaSpec{live::BetaSpec::Kind::exact_sparse, 2.0, 0.0}, p);
  const live::LowerTriangular chol =
      live::cholesky(live::make_ar_covariance(p - 1, 0.5));
  RngStream data_stream(13, 0);
  const Dataset d = live::gen_dataset(n, beta, chol, data_stream);
  RngStream loading_stream(13, live::kLoadingStreamIndex);
  const Loading xs = live::gen_loading(
      live::LoadingSpec{live::LoadingSpec::Kind::loading1, 1.0 / 25.0}, p,
      loading_stream);

  live::InferOptions opts;
  RngStream s1(21, 0), s2(21, 0);
  const live::InferenceResult r1 = live::infer(d, xs, opts, s1);
  const live::InferenceResult r2 = live::infer(d, xs, opts, s2);
  CHECK(r1.linear_estimate == r2.linear_estimate);
  CHECK(r1.variance == r2.variance);
  CHECK(r1.ci_lower == r2.ci_lower);
  CHECK(r1.ci_upper == r2.ci_upper);
  CHECK(r1.p_value == r2.p_value);
  CHECK(r1.case_probability == live::sigmoid(r1.linear_estimate));
  CHECK(r1.ci_lower <= r1.case_probability);
  CHECK(r1.case_probability <= r1.ci_upper);
  CHECK(r1.certificate.has_value());

  SUBCASE("test decision is invariant to positive loading scale") {
    RngStream s3(21, 0);
    Loading scaled;
    scaled.values = 3.0 * xs.values;
    const live::InferenceResult r3 = live::infer(d, scaled, opts, s3);
    CHECK(r3.reject_null == r1.reject_null);
    CHECK(std::abs(r3.linear_estimate - 3.0 * r1.linear_estimate) < 1e-6);
    CHECK(std::abs(r3.p_value - r1.p_value) < 1e-8);
  }
}

TEST_CASE("low-dimensional oracle: LiVE close to the MLE plug-in") {
  const int p = 4, n = 5000;
  Eigen::VectorXd beta(p);
  beta << 0.3, 0.8, -0.6, 0.4;
  const live::LowerTriangular chol =
      live::cholesky(live::make_ar_covariance(p - 1, 0.5));
  RngStream stream(31, 0);
  const Dataset d = live::gen_dataset(n, beta, chol, stream);
  Loading xs;
  xs.values.resize(p);
  xs.values << 1.0, 1.2, -0.5, 0.3;

  live::InferOptions opts;
  RngStream s(31, 1);
  const live::InferenceResult r = live::infer(d, xs, opts, s);
  const live::MleFit mle = live::fit_logistic_mle(d.x, d.y);
  const double mle_est = xs.values.dot(mle.coefficients);
  CHECK(std::abs(r.linear_estimate - mle_est) <= 3.0 * std::sqrt(r.variance));
}

TEST_CASE("type-I error under the null at desk scale") {
  const int p = 51, n = 150, reps = 200;
  const Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  const live::LowerTriangular chol =
      live::cholesky(live::make_ar_covariance(p - 1, 0.5));
  Loading e2;
  e2.values = Eigen::VectorXd::Zero(p);
  e2.values[1] = 1.0;

  live::InferOptions opts;
  opts.cv.grid_size = 25;
  int rejections = 0;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream stream(77, rep);
    const Dataset d = live::gen_dataset(n, beta, chol, stream);
    const live::InferenceResult r = live::infer(d, e2, opts, stream);
    if (r.reject_null) ++rejections;
  }
  CHECK(static_cast<double>(rejections) / reps <= 0.08);
}
