#pragma once

#include <cstdint>
#include <Eigen/Core>

namespace live {

/// Deterministic split-based random stream. Streams derived from the same
/// (master_seed, stream_index) pair produce identical sequences; distinct
/// stream indices under one master seed give independent streams, so
/// replication r of a Monte-Carlo run can use stream_index = r.
///
/// The generator is SplitMix64 with a per-stream state and increment derived
/// by avalanche-mixing the seed and index.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  std::uint64_t next_u64();
  /// Uniform draw in (0, 1].
  double next_uniform();
  /// One standard normal draw (Box-Muller, spare cached).
  double next_gaussian();

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t state_;
  std::uint64_t gamma_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// count i.i.d. N(0,1) draws from the stream.
Eigen::VectorXd sample_standard_gaussian(RngStream& stream, Eigen::Index count);

/// Phi(z), absolute error below 1e-12.
double std_normal_cdf(double z);

/// Inverse of std_normal_cdf on (0,1). Rational approximation plus one
/// Newton refinement; absolute error below 1e-8.
double std_normal_quantile(double q);

/// Cholesky factor of a symmetric positive-definite matrix, L * L^T = sigma.
struct LowerTriangular {
  Eigen::MatrixXd l;  // lower triangle filled, strict upper triangle zero
  Eigen::Index dim() const { return l.rows(); }
};

/// Throws a numerical Error naming the failing pivot index when sigma is not
/// positive definite, and a validation Error when it is not symmetric.
LowerTriangular cholesky(const Eigen::MatrixXd& sigma);

}  // namespace live
