#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

#include "imsam/target.hpp"

namespace imsam {

/// Counter-based splittable random stream keyed by (seed, stream_id).
///
/// Draw k of stream (s, i) is a pure function of (s, i, k), so identical
/// keys reproduce identical draws across runs and across any parallel
/// schedule. Monte Carlo loops give each sample its own stream_id and never
/// share a stream between threads.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();
  /// Uniform draw strictly inside (0, 1).
  double next_uniform();
  /// Standard normal via inverse CDF on a single 64-bit draw. Monotone in
  /// the underlying uniform and free of rejection loops, so streams stay
  /// aligned no matter what was drawn before.
  double next_normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// d independent standard normals from the given stream.
Eigen::VectorXd sample_standard_normal(RngStream& rng, int d);

/// Draws x ~ N(x*, H^{-1}) via x = x* + L^{-T} xi and returns both the point
/// and the whitened draw xi. centered_quadratic(m, x) equals 0.5 |xi|^2 up
/// to the roundoff of the triangular solve.
std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_proposal(const ModeInfo& m, RngStream& rng);

/// eta = L^T (x - x*): coordinates in which the mode Hessian is the identity.
Eigen::VectorXd whiten(const ModeInfo& m, const Eigen::VectorXd& x);
/// Inverse of whiten: x = x* + L^{-T} eta.
Eigen::VectorXd unwhiten(const ModeInfo& m, const Eigen::VectorXd& eta);

/// Monomial X_{i1} ... X_{i2n} over the coordinates of a Gaussian vector,
/// given as the (repeatable) list of indices.
struct Monomial {
  std::vector<int> indices;

  int degree() const { return static_cast<int>(indices.size()); }
};

/// E[X_{i1} ... X_{ik}] for mean-zero Gaussian X with the given covariance:
/// the sum over all perfect pairings of products of covariances. Odd degree
/// gives exactly 0. Degree above 16 is rejected (the pairing count grows as
/// (2n-1)!!); callers must fall back to Monte Carlo there.
double wick_expectation(const Monomial& mono, const Eigen::MatrixXd& cov);

/// For C homogeneous of degree p and xi ~ N(0, I_d),
/// E[C(xi)/|xi|^{2k}] = factor * E[C(xi)] with
///   factor = 1/(p-2+d)            for k = 1,
///   factor = 1/((p-4+d)(p-2+d))   for k = 2.
/// Requires p - 2k + d > 0.
double rational_reduction_factor(int p, int d, int k);

}  // namespace imsam
