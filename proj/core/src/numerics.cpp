#include "live/numerics.hpp"

#include <cmath>
#include <string>

#include "live/types.hpp"

namespace live {

namespace {

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed), stream_index_(stream_index) {
  state_ = mix64(mix64(master_seed) ^ mix64(stream_index * 0xd1342543de82ef95ULL + 1));
  // per-stream odd increment, SplittableRandom style
  gamma_ = mix64(state_ ^ 0x9e3779b97f4a7c15ULL) | 1ULL;
}

std::uint64_t RngStream::next_u64() {
  state_ += gamma_;
  return mix64(state_);
}

double RngStream::next_uniform() {
  // 53-bit mantissa, shifted into (0, 1]
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Eigen::VectorXd sample_standard_gaussian(RngStream& stream, Eigen::Index count) {
  if (count < 1) throw_validation("sample_standard_gaussian: count must be >= 1");
  Eigen::VectorXd z(count);
  for (Eigen::Index i = 0; i < count; ++i) z[i] = stream.next_gaussian();
  return z;
}

double std_normal_cdf(double z) {
  if (!std::isfinite(z)) throw_validation("std_normal_cdf: non-finite argument");
  return 0.5 * std::erfc(-z * M_SQRT1_2);
}

namespace {

// Acklam's rational approximation to the normal quantile, |err| < 1.2e-9.
double acklam_quantile(double q) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (q < plow) {
    const double t = std::sqrt(-2.0 * std::log(q));
    return (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
           ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
  }
  if (q > 1.0 - plow) {
    const double t = std::sqrt(-2.0 * std::log(1.0 - q));
    return -(((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
           ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
  }
  const double u = q - 0.5;
  const double t = u * u;
  return (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * u /
         (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
}

}  // namespace

double std_normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0))
    throw_validation("std_normal_quantile: argument must lie in (0, 1)");
  double z = acklam_quantile(q);
  // one Newton step on Phi(z) - q
  const double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  if (density > 0.0) z -= (std_normal_cdf(z) - q) / density;
  return z;
}

LowerTriangular cholesky(const Eigen::MatrixXd& sigma) {
  const Eigen::Index p = sigma.rows();
  if (sigma.cols() != p) throw_validation("cholesky: matrix must be square");
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = j + 1; i < p; ++i)
      if (std::abs(sigma(i, j) - sigma(j, i)) > 1e-12 * scale)
        throw_validation("cholesky: matrix not symmetric within 1e-12 at (" +
                         std::to_string(i) + "," + std::to_string(j) + ")");

  LowerTriangular out;
  out.l = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd& l = out.l;
  for (Eigen::Index j = 0; j < p; ++j) {
    double diag = sigma(j, j);
    for (Eigen::Index k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag))
      throw_numerical("cholesky: matrix not positive definite (pivot " +
                      std::to_string(j) + " is " + std::to_string(diag) + ")");
    l(j, j) = std::sqrt(diag);
    for (Eigen::Index i = j + 1; i < p; ++i) {
      double s = sigma(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return out;
}

}  // namespace live
