#include "imsam/problems.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>

#include "imsam/gaussian.hpp"

namespace imsam {

namespace {

// Second-difference matrix of the tied-down walk: diag 2 (last entry 1),
// off-diagonal -1.
Eigen::MatrixXd walk_hessian_at_zero(int n) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = (i + 1 < n) ? 2.0 : 1.0;
    if (i + 1 < n) {
      h(i, i + 1) = -1.0;
      h(i + 1, i) = -1.0;
    }
  }
  return h;
}

constexpr std::uint64_t kDataStreamOffset = 1ull << 63;

}  // namespace

TargetDensity randomwalk_target(const RandomWalkProblem& p) {
  if (p.n_dim < 1) throw std::invalid_argument("randomwalk_target: n_dim must be >= 1");
  if (!(p.epsilon >= 0.0)) throw std::invalid_argument("randomwalk_target: epsilon must be >= 0");
  const int n = p.n_dim;
  const double c3 = std::sqrt(p.epsilon) * p.alpha;
  const double c4 = p.epsilon * p.beta;

  auto potential = [n, c3, c4](const Eigen::VectorXd& x) {
    double g = 0.0;
    double prev = 0.0;
    for (int k = 0; k < n; ++k) {
      const double d = x[k] - prev;
      const double d2 = d * d;
      g += 0.5 * d2 + c3 * d2 * d + c4 * d2 * d2;
      prev = x[k];
    }
    return g;
  };
  auto gradient = [n, c3, c4](const Eigen::VectorXd& x) {
    // u'(d) = d + 3 c3 d^2 + 4 c4 d^3 per increment; node i touches
    // increments i-1 (+) and i (-).
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    double prev = 0.0;
    for (int k = 0; k < n; ++k) {
      const double d = x[k] - prev;
      const double du = d + 3.0 * c3 * d * d + 4.0 * c4 * d * d * d;
      g[k] += du;
      if (k > 0) g[k - 1] -= du;
      prev = x[k];
    }
    return g;
  };
  auto hessian = [n, c3, c4](const Eigen::VectorXd& x) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    double prev = 0.0;
    for (int k = 0; k < n; ++k) {
      const double d = x[k] - prev;
      const double ddu = 1.0 + 6.0 * c3 * d + 12.0 * c4 * d * d;
      h(k, k) += ddu;
      if (k > 0) {
        h(k - 1, k - 1) += ddu;
        h(k - 1, k) -= ddu;
        h(k, k - 1) -= ddu;
      }
      prev = x[k];
    }
    return h;
  };
  return TargetDensity(n, p.epsilon, potential, gradient, hessian);
}

Eigen::Vector3d integrate_lorenz(const Eigen::Vector3d& x0, const Lorenz63Problem& p) {
  if (!(p.T >= 0.0)) throw std::invalid_argument("integrate_lorenz: T must be >= 0");
  if (p.T == 0.0) return x0;

  using state_type = std::array<double, 3>;
  namespace odeint = boost::numeric::odeint;

  const double sigma = p.sigma, beta = p.beta, rho = p.rho;
  auto rhs = [sigma, beta, rho](const state_type& s, state_type& dsdt, double) {
    dsdt[0] = sigma * (s[1] - s[0]);
    dsdt[1] = s[0] * (rho - s[2]) - s[1];
    dsdt[2] = s[0] * s[1] - beta * s[2];
  };

  state_type s{x0[0], x0[1], x0[2]};
  try {
    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<state_type>>(
        p.ode_abs_tol, p.ode_rel_tol);
    odeint::integrate_adaptive(stepper, rhs, s, 0.0, p.T, 0.01 * p.T);
  } catch (const std::exception& e) {
    throw OdeError(std::string("integrate_lorenz: step size control failed: ") + e.what());
  }
  return {s[0], s[1], s[2]};
}

TargetDensity lorenz_target(const Lorenz63Problem& p) {
  if (!(p.epsilon > 0.0)) throw std::invalid_argument("lorenz_target: epsilon must be positive");
  if (!(p.T >= 0.0)) throw std::invalid_argument("lorenz_target: T must be >= 0");

  auto potential = [p](const Eigen::VectorXd& x) {
    const Eigen::Vector3d x0(x[0], x[1], x[2]);
    const Eigen::Vector3d r_data = p.data - integrate_lorenz(x0, p);
    const Eigen::Vector3d r_prior = p.mu0 - x0;
    return 0.5 * (r_data.squaredNorm() + r_prior.squaredNorm()) / p.epsilon;
  };
  return TargetDensity(3, p.epsilon, potential);
}

Lorenz63Problem generate_lorenz_instance(double eps, double T, std::uint64_t seed) {
  if (!(eps > 0.0) || !(T > 0.0))
    throw std::invalid_argument("generate_lorenz_instance: eps and T must be positive");

  Lorenz63Problem p;
  p.T = T;
  p.epsilon = eps;
  const double se = std::sqrt(eps);
  p.x0_true = p.mu0 + 0.5 * Eigen::Vector3d(se, -se, se);

  RngStream rng(seed, kDataStreamOffset);
  Eigen::VectorXd noise = sample_standard_normal(rng, 3);
  p.data = integrate_lorenz(p.x0_true, p) + se * Eigen::Vector3d(noise[0], noise[1], noise[2]);
  return p;
}

TargetDensity quadratic_target(const QuadraticProblem& p) {
  if (p.dim < 1) throw std::invalid_argument("quadratic_target: dim must be >= 1");
  if (!(p.epsilon > 0.0)) throw std::invalid_argument("quadratic_target: epsilon must be positive");
  const Eigen::MatrixXd h0 = walk_hessian_at_zero(p.dim) / p.epsilon;
  const Eigen::VectorXd a = quadratic_mode(p);

  auto potential = [h0, a](const Eigen::VectorXd& x) {
    const Eigen::VectorXd d = x - a;
    return 0.5 * d.dot(h0 * d);
  };
  auto gradient = [h0, a](const Eigen::VectorXd& x) { return Eigen::VectorXd(h0 * (x - a)); };
  auto hessian = [h0](const Eigen::VectorXd&) { return h0; };
  return TargetDensity(p.dim, p.epsilon, potential, gradient, hessian);
}

Eigen::VectorXd quadratic_mode(const QuadraticProblem& p) {
  Eigen::VectorXd a(p.dim);
  for (int i = 0; i < p.dim; ++i) a[i] = 0.75 * static_cast<double>(i % 3 - 1);
  return a;
}

}  // namespace imsam
