#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "imsam/samplers.hpp"
#include "imsam/target.hpp"

namespace imsam {

/// Cubic and quartic coefficients of the whitened potential restricted to a
/// ray: for g(s) = phi(s * x_w), c3 = g'''(0)/6 and c4 = g''''(0)/24.
struct RayCoefficients {
  double c3 = 0.0;
  double c4 = 0.0;
  /// Set when the two-step Richardson check on c4 disagrees by more than 1%.
  bool step_inconsistent = false;
};

/// Monte Carlo moments of the ray coefficients over xi ~ N(0, I), with
/// jackknife standard errors (100 contiguous batches).
struct TaylorMoments {
  double e_c3sq = 0.0;                   // E[C3^2]
  double e_c4 = 0.0;                     // E[C4]
  double var_c4_minus_half_c3sq = 0.0;   // var(C4 - C3^2 / 2)
  double e_c3_4 = 0.0;                   // E[C3^4]
  double e_c3sq_c4 = 0.0;                // E[C3^2 C4]
  double e_c4sq = 0.0;                   // E[C4^2]
  long n_used = 0;
  long n_step_warnings = 0;

  double se_c3sq = 0.0;
  double se_c4 = 0.0;
  double se_var = 0.0;
  double se_c3_4 = 0.0;
  double se_c3sq_c4 = 0.0;
  double se_c4sq = 0.0;
};

/// Extracts C3(x), C4(x) of the whitened expansion along the whitened image
/// of x, by 7-point central differences in the ray parameter.
RayCoefficients taylor_ray_coefficients(const TargetDensity& t, const ModeInfo& m,
                                        const Eigen::VectorXd& x);

/// Estimates the Taylor-coefficient moments from n whitened standard-normal
/// rays; ray k uses RngStream(seed, k). Requires n >= 100.
TaylorMoments estimate_taylor_moments(const TargetDensity& t, const ModeInfo& m, long n,
                                      std::uint64_t seed, int n_threads = 0);

/// Leading-order quality prediction for the simple and symmetrized linear
/// and random maps:
///   lm:  eps   * E[C3^2]
///   rm:  eps   * (1+d)^2 / ((2+d)(4+d)) * E[C3^2]
///   slm: eps^2 * var(C4 - C3^2/2)
/// When the moments were computed on a potential with the noise parameter
/// folded in, every eps power is already embedded in them: pass eps = 1.
/// The symmetrized random map has no such closed form here; use
/// predict_q_symmetrized_random.
double predict_q(Method method, int d, double eps, const TaylorMoments& mom);

/// Exact dimension-dependent prediction for the symmetrized random map,
/// Q = eps^2 (I - II + III), assembled from the higher Taylor moments via
/// the rational Gaussian reduction identities. Converges to the slm
/// constant as d grows.
double predict_q_symmetrized_random(int d, double eps, const TaylorMoments& mom);

/// Closed-form constants for the nonlinear random walk:
///   lm:  15 a^2 N eps
///   rm:  15 a^2 eps N (N+1)^2 / ((N+2)(N+4))
///   slm: (225 a^4 N^2 / 2) eps^2   (leading term in N)
/// srm has no closed form and is rejected.
double randomwalk_closed_form(Method method, int n_dim, double alpha, double eps);

}  // namespace imsam
