#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

#include "imsam/target.hpp"

namespace imsam {

struct OptimizeOptions {
  double grad_tol = 1e-8;       // sup-norm stopping tolerance on the gradient
  int max_iters = 200;
  double fd_step_grad = 6.055454452393343e-06;   // cbrt(machine epsilon)
  double fd_step_hess = 1.220703125e-04;         // (machine epsilon)^(1/4)
  Eigen::VectorXd initial_point;
};

class OptimizeError : public std::runtime_error {
 public:
  enum class Kind { IterationLimit, NotPositiveDefinite, LineSearchFailure };

  OptimizeError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Central-difference gradient of G. The step in coordinate i is
/// h * max(1, |x_i|). Throws if a probe produces a non-finite value.
Eigen::VectorXd fd_gradient(const TargetDensity& t, const Eigen::VectorXd& x, double h);

/// Central second differences of G, per-coordinate steps h * max(1, |x_i|).
/// The result is exactly symmetric (only the upper triangle is computed and
/// mirrored).
Eigen::MatrixXd fd_hessian(const TargetDensity& t, const Eigen::VectorXd& x, double h);

/// Finds the mode of G by BFGS with Armijo backtracking (c = 1e-4, factor
/// 0.5), using the target's analytic gradient when available and central
/// differences otherwise. The returned ModeInfo carries the Hessian at the
/// minimizer (analytic when the target supplies one, finite differences
/// otherwise) and its Cholesky factor.
///
/// Throws OptimizeError on iteration limit, line-search failure away from
/// the tolerance, or an indefinite Hessian at the found point.
ModeInfo minimize(const TargetDensity& t, const OptimizeOptions& opts);

}  // namespace imsam
