#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "imsam/target.hpp"

namespace imsam::testing {

/// Identity-mode view: x* = 0, g* = 0, H = I_d. Lets a test treat the raw
/// potential as the whitened one.
inline ModeInfo identity_mode(int d) {
  return make_mode_info(Eigen::VectorXd::Zero(d), 0.0, Eigen::MatrixXd::Identity(d, d));
}

/// G(x) = 0.5 |x|^2 in d dimensions.
inline TargetDensity pure_quadratic(int d) {
  return TargetDensity(
      d, 1.0, [](const Eigen::VectorXd& x) { return 0.5 * x.squaredNorm(); },
      [](const Eigen::VectorXd& x) { return Eigen::VectorXd(x); });
}

/// 1-D G(x) = 0.5 x^2 + a x^3. Not normalizable; only for pinned-draw tests.
inline TargetDensity cubic_1d(double a) {
  return TargetDensity(
      1, 1.0, [a](const Eigen::VectorXd& x) { return 0.5 * x[0] * x[0] + a * x[0] * x[0] * x[0]; },
      [a](const Eigen::VectorXd& x) {
        Eigen::VectorXd g(1);
        g[0] = x[0] + 3.0 * a * x[0] * x[0];
        return g;
      });
}

/// 1-D G(x) = 0.5 x^2 + a x^3 + b x^4 with b > 0: integrable, star-shaped
/// for 9 a^2 < 4 b, mode at 0 with unit curvature.
inline TargetDensity cubic_quartic_1d(double a, double b) {
  return TargetDensity(
      1, 1.0,
      [a, b](const Eigen::VectorXd& x) {
        const double v = x[0];
        return 0.5 * v * v + a * v * v * v + b * v * v * v * v;
      },
      [a, b](const Eigen::VectorXd& x) {
        const double v = x[0];
        Eigen::VectorXd g(1);
        g[0] = v + 3.0 * a * v * v + 4.0 * b * v * v * v;
        return g;
      });
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

/// Standard error of the sample mean.
inline double se_of_mean(const std::vector<double>& v) {
  return std::sqrt(variance_of(v) / static_cast<double>(v.size()));
}

}  // namespace imsam::testing
