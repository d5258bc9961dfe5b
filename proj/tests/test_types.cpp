#include <doctest.h>

#include <cmath>
#include <string>

#include "live/types.hpp"

namespace {

Eigen::MatrixXd small_x() {
  Eigen::MatrixXd x(3, 2);
  x << 1, 0.3, 1, -1.2, 1, 2.0;
  return x;
}

}  // namespace

TEST_CASE("validate_dataset accepts a clean dataset") {
  Eigen::VectorXd y(3);
  y << 0, 1, 1;
  const live::Dataset d = live::validate_dataset(small_x(), y, true);
  CHECK(d.n() == 3);
  CHECK(d.p() == 2);
  CHECK(d.has_intercept_column);
}

TEST_CASE("validate_dataset maps each bad input to its named error") {
  Eigen::VectorXd y(3);
  y << 0, 1, 1;

  SUBCASE("non-binary outcome names the offending index") {
    Eigen::VectorXd bad = y;
    bad[1] = 2.0;
    try {
      live::validate_dataset(small_x(), bad, true);
      FAIL("expected NonBinaryOutcome");
    } catch (const live::Error& e) {
      CHECK(std::string(e.what()).find("NonBinaryOutcome") != std::string::npos);
      CHECK(std::string(e.what()).find("y[1]") != std::string::npos);
    }
  }
  SUBCASE("intercept column must be exactly ones") {
    Eigen::MatrixXd x = small_x();
    x(2, 0) = 0.9;
    try {
      live::validate_dataset(x, y, true);
      FAIL("expected BadInterceptColumn");
    } catch (const live::Error& e) {
      CHECK(std::string(e.what()).find("BadInterceptColumn") != std::string::npos);
    }
    // the same column is fine when not declared an intercept
    CHECK_NOTHROW(live::validate_dataset(x, y, false));
  }
  SUBCASE("dimension mismatch") {
    Eigen::VectorXd yy(2);
    yy << 0, 1;
    try {
      live::validate_dataset(small_x(), yy, true);
      FAIL("expected DimensionMismatch");
    } catch (const live::Error& e) {
      CHECK(std::string(e.what()).find("DimensionMismatch") != std::string::npos);
    }
  }
  SUBCASE("non-finite entry") {
    Eigen::MatrixXd x = small_x();
    x(1, 1) = std::nan("");
    try {
      live::validate_dataset(x, y, true);
      FAIL("expected NonFiniteEntry");
    } catch (const live::Error& e) {
      CHECK(std::string(e.what()).find("NonFiniteEntry") != std::string::npos);
    }
  }
  SUBCASE("too few rows") {
    Eigen::MatrixXd x(1, 2);
    x << 1, 0.5;
    Eigen::VectorXd yy(1);
    yy << 1;
    CHECK_THROWS_AS(live::validate_dataset(x, yy, false), live::Error);
  }
}

TEST_CASE("validate_loading") {
  Eigen::VectorXd v(2);
  v << 1.0, -0.5;
  const live::Loading l = live::validate_loading(v, 2);
  CHECK(l.norm() == doctest::Approx(std::sqrt(1.25)));

  CHECK_THROWS_AS(live::validate_loading(v, 3), live::Error);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(live::validate_loading(zero, 2), live::Error);
  Eigen::VectorXd inf(2);
  inf << 1.0, INFINITY;
  CHECK_THROWS_AS(live::validate_loading(inf, 2), live::Error);
}

TEST_CASE("method names round trip") {
  for (live::Method m : {live::Method::live, live::Method::plugin_lasso,
                         live::Method::post_selection})
    CHECK(live::method_from_name(live::method_name(m)) == m);
  CHECK_THROWS_AS(live::method_from_name("bogus"), live::Error);
}
