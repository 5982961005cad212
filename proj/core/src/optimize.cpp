#include "imsam/optimize.hpp"

#include <cmath>
#include <limits>

namespace imsam {

namespace {

void check_finite(double v, const char* where) {
  if (!std::isfinite(v)) throw std::runtime_error(std::string(where) + ": non-finite potential value");
}

Eigen::VectorXd gradient_of(const TargetDensity& t, const Eigen::VectorXd& x, double h) {
  if (t.has_gradient()) return t.gradient(x);
  return fd_gradient(t, x, h);
}

}  // namespace

Eigen::VectorXd fd_gradient(const TargetDensity& t, const Eigen::VectorXd& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_gradient: h must be positive");
  const int d = t.dim();
  if (x.size() != d) throw std::invalid_argument("fd_gradient: x has wrong dimension");

  Eigen::VectorXd g(d);
  Eigen::VectorXd p = x;
  for (int i = 0; i < d; ++i) {
    const double hi = h * std::max(1.0, std::abs(x[i]));
    const double xi = x[i];
    p[i] = xi + hi;
    const double fp = t.potential(p);
    p[i] = xi - hi;
    const double fm = t.potential(p);
    p[i] = xi;
    check_finite(fp, "fd_gradient");
    check_finite(fm, "fd_gradient");
    g[i] = (fp - fm) / (2.0 * hi);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const TargetDensity& t, const Eigen::VectorXd& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_hessian: h must be positive");
  const int d = t.dim();
  if (x.size() != d) throw std::invalid_argument("fd_hessian: x has wrong dimension");

  Eigen::VectorXd steps(d);
  for (int i = 0; i < d; ++i) steps[i] = h * std::max(1.0, std::abs(x[i]));

  const double f0 = t.potential(x);
  check_finite(f0, "fd_hessian");

  Eigen::MatrixXd hess(d, d);
  Eigen::VectorXd p = x;
  for (int i = 0; i < d; ++i) {
    const double xi = x[i];
    p[i] = xi + steps[i];
    const double fp = t.potential(p);
    p[i] = xi - steps[i];
    const double fm = t.potential(p);
    p[i] = xi;
    check_finite(fp, "fd_hessian");
    check_finite(fm, "fd_hessian");
    hess(i, i) = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
  }
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const double xi = x[i];
      const double xj = x[j];
      double fpp, fpm, fmp, fmm;
      p[i] = xi + steps[i]; p[j] = xj + steps[j]; fpp = t.potential(p);
      p[j] = xj - steps[j]; fpm = t.potential(p);
      p[i] = xi - steps[i]; fmm = t.potential(p);
      p[j] = xj + steps[j]; fmp = t.potential(p);
      p[i] = xi; p[j] = xj;
      check_finite(fpp, "fd_hessian");
      check_finite(fpm, "fd_hessian");
      check_finite(fmp, "fd_hessian");
      check_finite(fmm, "fd_hessian");
      const double v = (fpp - fpm - fmp + fmm) / (4.0 * steps[i] * steps[j]);
      hess(i, j) = v;
      hess(j, i) = v;  // mirrored, so the output is symmetric bit for bit
    }
  }
  return hess;
}

ModeInfo minimize(const TargetDensity& t, const OptimizeOptions& opts) {
  if (!(opts.grad_tol > 0.0) || !(opts.fd_step_grad > 0.0) || !(opts.fd_step_hess > 0.0))
    throw std::invalid_argument("minimize: tolerances must be strictly positive");
  if (opts.max_iters < 1) throw std::invalid_argument("minimize: max_iters must be >= 1");
  const int d = t.dim();
  if (opts.initial_point.size() != d)
    throw std::invalid_argument("minimize: initial_point has wrong dimension");

  constexpr double kArmijo = 1e-4;
  constexpr double kBacktrack = 0.5;

  Eigen::VectorXd x = opts.initial_point;
  double f = t.potential(x);
  check_finite(f, "minimize");
  Eigen::VectorXd g = gradient_of(t, x, opts.fd_step_grad);

  Eigen::MatrixXd binv = Eigen::MatrixXd::Identity(d, d);  // inverse Hessian approximation
  bool scaled = false;
  bool converged = g.lpNorm<Eigen::Infinity>() <= opts.grad_tol;
  bool stalled = false;

  for (int iter = 0; iter < opts.max_iters && !converged && !stalled; ++iter) {
    Eigen::VectorXd p = -(binv * g);
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      // Direction lost descent; restart from steepest descent.
      binv.setIdentity();
      scaled = false;
      p = -g;
      slope = g.dot(p);
    }

    double alpha = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    bool found = false;
    while (alpha > 1e-20) {
      x_new = x + alpha * p;
      f_new = t.potential(x_new);
      if (std::isfinite(f_new) && f_new <= f + kArmijo * alpha * slope) {
        found = true;
        break;
      }
      alpha *= kBacktrack;
    }
    if (!found) {
      stalled = true;
      break;
    }

    Eigen::VectorXd g_new = gradient_of(t, x_new, opts.fd_step_grad);
    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        binv = (sy / y.squaredNorm()) * Eigen::MatrixXd::Identity(d, d);
        scaled = true;
      }
      const double rho = 1.0 / sy;
      Eigen::MatrixXd byt = binv * y * s.transpose() * rho;
      binv = binv - byt - byt.transpose() + (rho * rho * (y.dot(binv * y)) + rho) * s * s.transpose();
    }

    x = std::move(x_new);
    f = f_new;
    g = std::move(g_new);
    converged = g.lpNorm<Eigen::Infinity>() <= opts.grad_tol;
  }

  if (!converged && !stalled)
    throw OptimizeError(OptimizeError::Kind::IterationLimit,
                        "minimize: iteration limit exceeded at gradient sup-norm " +
                            std::to_string(g.lpNorm<Eigen::Infinity>()));

  // Newton polish with the full Hessian. Accepted only while it improves the
  // gradient; refines a converged point and rescues a stalled line search
  // near the solution.
  Eigen::MatrixXd hess = t.has_hessian() ? t.hessian(x) : fd_hessian(t, x, opts.fd_step_hess);
  {
    double gnorm = g.lpNorm<Eigen::Infinity>();
    for (int polish = 0; polish < 3; ++polish) {
      Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (hess + hess.transpose()));
      if (llt.info() != Eigen::Success) break;
      Eigen::VectorXd x_try = x - llt.solve(g);
      double f_try = t.potential(x_try);
      if (!std::isfinite(f_try)) break;
      Eigen::VectorXd g_try = gradient_of(t, x_try, opts.fd_step_grad);
      const double gnorm_try = g_try.lpNorm<Eigen::Infinity>();
      if (gnorm_try >= gnorm) break;
      x = std::move(x_try);
      f = f_try;
      g = std::move(g_try);
      gnorm = gnorm_try;
      converged = gnorm <= opts.grad_tol;
      if (converged) {
        hess = t.has_hessian() ? t.hessian(x) : fd_hessian(t, x, opts.fd_step_hess);
        break;
      }
      hess = t.has_hessian() ? t.hessian(x) : fd_hessian(t, x, opts.fd_step_hess);
    }
  }

  if (!converged)
    throw OptimizeError(OptimizeError::Kind::LineSearchFailure,
                        "minimize: line search stalled at gradient sup-norm " +
                            std::to_string(g.lpNorm<Eigen::Infinity>()));

  try {
    return make_mode_info(x, f, hess);
  } catch (const std::invalid_argument& e) {
    throw OptimizeError(OptimizeError::Kind::NotPositiveDefinite,
                        std::string("minimize: ") + e.what());
  }
}

}  // namespace imsam
