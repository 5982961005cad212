#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "imsam/target.hpp"

namespace imsam {

/// Nonlinear random walk tied at the start and free at the end, N steps.
/// The working potential, in scaled coordinates with the noise parameter
/// folded into the coefficients, is
///   G(x) = 1/2 sum dk^2 + sqrt(eps) alpha sum dk^3 + eps beta sum dk^4,
/// with increments dk = x_{k+1} - x_k and x_0 = 0. The full potential is
/// its own quartic Taylor truncation, so the closed-form error constants
/// apply exactly.
struct RandomWalkProblem {
  int n_dim = 2;        // N: number of steps = dimension
  double alpha = 1.0;   // cubic coupling
  double beta = 1.0;    // quartic coupling
  double epsilon = 1e-4;
};

/// Target with analytic gradient and (tridiagonal) Hessian evaluators.
TargetDensity randomwalk_target(const RandomWalkProblem& p);

/// Lorenz '63 initial-condition posterior. The state at time T is observed
/// with isotropic Gaussian noise of covariance eps I_3; the prior on x0 is
/// N(mu0, eps I_3). Working potential G = F/eps with
///   F(x0) = 1/2 [ (data - h(x0))^T (data - h(x0)) + (mu0 - x0)^T (mu0 - x0) ],
/// where h integrates the Lorenz equations from x0 to time T.
struct Lorenz63Problem {
  double sigma = 10.0;
  double beta = 8.0 / 3.0;
  double rho = 28.0;
  double T = 0.05;
  double epsilon = 1.0;
  Eigen::Vector3d mu0{3.6314, 6.6136, 10.6044};
  Eigen::Vector3d data = Eigen::Vector3d::Zero();
  Eigen::Vector3d x0_true = Eigen::Vector3d::Zero();
  double ode_rel_tol = 1e-10;
  double ode_abs_tol = 1e-12;
};

class OdeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integrates the Lorenz equations from x0 over [0, T] with an adaptive
/// Dormand-Prince 5(4) stepper at the problem's tolerances. T = 0 returns x0.
Eigen::Vector3d integrate_lorenz(const Eigen::Vector3d& x0, const Lorenz63Problem& p);

/// Posterior target; the potential wraps integrate_lorenz, no analytic
/// gradient (finite differences are used downstream).
TargetDensity lorenz_target(const Lorenz63Problem& p);

/// Builds a problem instance with synthetic data: the true initial state is
/// mu0 + 0.5 (sqrt(eps), -sqrt(eps), sqrt(eps)), observed through h with
/// N(0, eps I_3) noise drawn from a stream reserved for data generation
/// (stream_id offset 2^63), so the realization never depends on how many
/// samples are drawn later.
Lorenz63Problem generate_lorenz_instance(double eps, double T, std::uint64_t seed);

/// Gaussian benchmark target with a shifted mode and a non-diagonal SPD
/// Hessian; every sampler should produce constant weights on it.
struct QuadraticProblem {
  int dim = 3;
  double epsilon = 1.0;
};

TargetDensity quadratic_target(const QuadraticProblem& p);

/// The mode the quadratic problem is built around (for tests and sweeps).
Eigen::VectorXd quadratic_mode(const QuadraticProblem& p);

}  // namespace imsam
