#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "imsam/optimize.hpp"
#include "imsam/problems.hpp"
#include "imsam/target.hpp"
#include "test_support.hpp"

using namespace imsam;
using namespace imsam::testing;

TEST_CASE("eval_potential dispatches to the evaluator") {
  TargetDensity quad = pure_quadratic(2);
  Eigen::Vector2d x(1.0, 1.0);
  CHECK(eval_potential(quad, x) == doctest::Approx(1.0));

  RandomWalkProblem walk{1, 1.0, 1.0, 0.0};
  TargetDensity wt = randomwalk_target(walk);
  Eigen::VectorXd w(1);
  w[0] = 2.0;
  CHECK(eval_potential(wt, w) == doctest::Approx(2.0));

  Lorenz63Problem lp;
  lp.T = 0.05;
  lp.epsilon = 1.0;
  lp.data = integrate_lorenz(lp.mu0, lp);  // residual-free observation
  TargetDensity lt = lorenz_target(lp);
  CHECK(eval_potential(lt, lp.mu0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("eval_potential rejects dimension mismatch") {
  TargetDensity quad = pure_quadratic(2);
  Eigen::Vector3d bad(1.0, 2.0, 3.0);
  CHECK_THROWS_AS(eval_potential(quad, bad), std::invalid_argument);
}

TEST_CASE("centered_quadratic values") {
  SUBCASE("center") {
    ModeInfo m = identity_mode(3);
    CHECK(centered_quadratic(m, Eigen::Vector3d::Zero().eval()) == 0.0);
  }
  SUBCASE("identity Hessian") {
    ModeInfo m = identity_mode(2);
    CHECK(centered_quadratic(m, Eigen::Vector2d(3.0, 4.0).eval()) == doctest::Approx(12.5));
  }
  SUBCASE("diagonal Hessian, shifted mode") {
    Eigen::Vector2d xs(1.0, -2.0);
    Eigen::Matrix2d h;
    h << 2.0, 0.0, 0.0, 8.0;
    ModeInfo m = make_mode_info(xs, 0.0, h);
    CHECK(centered_quadratic(m, (xs + Eigen::Vector2d(1.0, 1.0)).eval()) == doctest::Approx(5.0));
  }
}

TEST_CASE("centered_quadratic is exactly symmetric about the mode") {
  Eigen::Vector2d xs(0.5, -1.25);  // dyadic, so the reflection is exact in fp
  Eigen::Matrix2d h;
  h << 3.0, 1.0, 1.0, 2.0;
  ModeInfo m = make_mode_info(xs, 0.0, h);
  for (int i = 0; i < 50; ++i) {
    Eigen::Vector2d x(std::ldexp(static_cast<double>(37 * i % 512 - 256), -6),
                      std::ldexp(static_cast<double>(91 * i % 512 - 256), -6));
    Eigen::Vector2d reflected = 2.0 * xs - x;
    CHECK(centered_quadratic(m, x.eval()) == centered_quadratic(m, reflected.eval()));
  }
}

TEST_CASE("pure quadratic target matches its own centered quadratic") {
  QuadraticProblem p{4, 1.0};
  TargetDensity t = quadratic_target(p);
  OptimizeOptions opts;
  opts.initial_point = Eigen::VectorXd::Zero(4);
  ModeInfo m = minimize(t, opts);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(4, -1.0 + 0.11 * i);
    x[1] += 0.3;
    CHECK(eval_potential(t, x) - m.g_star ==
          doctest::Approx(centered_quadratic(m, x)).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  RandomWalkProblem p{3, 1.0, 1.0, 0.01};
  TargetDensity t = randomwalk_target(p);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x(3);
    x << 0.3 * std::sin(1.0 + i), -0.4 * std::cos(2.0 + i), 0.2 * std::sin(3.0 * i + 0.5);
    Eigen::VectorXd ag = t.gradient(x);
    Eigen::VectorXd fg = fd_gradient(t, x, 6e-6);
    for (int j = 0; j < 3; ++j)
      CHECK(ag[j] == doctest::Approx(fg[j]).epsilon(1e-5));
  }
}

TEST_CASE("potentials grow at large radius") {
  RandomWalkProblem p{2, 1.0, 1.0, 1e-3};
  TargetDensity walk = randomwalk_target(p);
  TargetDensity quad = quadratic_target(QuadraticProblem{2, 1.0});
  const double r = 1e3;
  for (double angle : {0.0, 0.7, 1.9, 3.1, 4.4, 5.6}) {
    Eigen::Vector2d u(std::cos(angle), std::sin(angle));
    CHECK(eval_potential(walk, (r * u).eval()) > 1e3);
    CHECK(eval_potential(quad, (r * u).eval()) > 1e3);
  }
}

TEST_CASE("make_mode_info validation") {
  Eigen::Matrix2d asym;
  asym << 1.0, 0.5, 0.4, 1.0;  // far beyond the 1e-8 relative tolerance
  CHECK_THROWS_AS(make_mode_info(Eigen::Vector2d::Zero(), 0.0, asym), std::invalid_argument);

  Eigen::Matrix2d indefinite;
  indefinite << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(make_mode_info(Eigen::Vector2d::Zero(), 0.0, indefinite),
                  std::invalid_argument);

  Eigen::Matrix2d good;
  good << 2.0, -1.0, -1.0, 1.0;
  ModeInfo m = make_mode_info(Eigen::Vector2d(1.0, 2.0), 3.0, good);
  CHECK((m.chol * m.chol.transpose() - good).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(m.g_star == 3.0);
}
