#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "imsam/gaussian.hpp"
#include "test_support.hpp"

using namespace imsam;
using namespace imsam::testing;

TEST_CASE("streams replay bitwise and separate by stream id") {
  RngStream a(7, 0);
  RngStream b(7, 0);
  Eigen::VectorXd va = sample_standard_normal(a, 16);
  Eigen::VectorXd vb = sample_standard_normal(b, 16);
  for (int i = 0; i < 16; ++i) CHECK(va[i] == vb[i]);

  RngStream c(7, 1);
  Eigen::VectorXd vc = sample_standard_normal(c, 16);
  CHECK((va - vc).cwiseAbs().maxCoeff() > 0.0);

  RngStream d(8, 0);
  Eigen::VectorXd vd = sample_standard_normal(d, 16);
  CHECK((va - vd).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("standard normal moments") {
  const long n = 100000;
  std::vector<double> draws(n);
  for (long k = 0; k < n; ++k) {
    RngStream rng(123, static_cast<std::uint64_t>(k));
    draws[k] = rng.next_normal();
  }
  CHECK(std::abs(mean_of(draws)) < 0.01);       // 3 sigma = 0.0095
  CHECK(std::abs(variance_of(draws) - 1.0) < 0.015);
}

TEST_CASE("uniform draws stay inside (0,1)") {
  RngStream rng(5, 9);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("whiten and unwhiten") {
  SUBCASE("identity Hessian is the identity map") {
    ModeInfo m = identity_mode(3);
    Eigen::Vector3d x(0.3, -0.7, 1.1);
    CHECK((whiten(m, x.eval()) - x).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("diagonal case") {
    Eigen::Matrix2d h;
    h << 4.0, 0.0, 0.0, 9.0;
    ModeInfo m = make_mode_info(Eigen::Vector2d(0.5, -0.5), 0.0, h);
    Eigen::VectorXd eta = whiten(m, Eigen::Vector2d(1.5, 0.5).eval());
    CHECK(eta[0] == doctest::Approx(2.0));
    CHECK(eta[1] == doctest::Approx(3.0));
  }
  SUBCASE("round trip") {
    Eigen::Matrix3d h;
    h << 4.0, 1.0, 0.0, 1.0, 3.0, -1.0, 0.0, -1.0, 2.0;
    ModeInfo m = make_mode_info(Eigen::Vector3d(1.0, 2.0, 3.0), 0.0, h);
    RngStream rng(2, 0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      Eigen::VectorXd x = Eigen::Vector3d(1.0, 2.0, 3.0) + sample_standard_normal(rng, 3);
      worst = std::max(worst, (unwhiten(m, whiten(m, x)) - x).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("proposal draws") {
  SUBCASE("whitening geometry") {
    Eigen::MatrixXd h(1, 1);
    h << 4.0;
    ModeInfo m = make_mode_info(Eigen::VectorXd::Constant(1, 2.0), 0.0, h);
    Eigen::VectorXd xi = Eigen::VectorXd::Ones(1);
    CHECK(unwhiten(m, xi)[0] == doctest::Approx(2.5));  // x* + L^{-T} xi with L = 2

    ModeInfo ident = identity_mode(2);
    Eigen::VectorXd e1 = Eigen::Vector2d(1.0, 0.0);
    CHECK((unwhiten(ident, e1) - e1).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("x and xi stay consistent") {
    Eigen::Matrix2d h;
    h << 2.0, -1.0, -1.0, 1.0;
    ModeInfo m = make_mode_info(Eigen::Vector2d(1.0, 1.0), 0.0, h);
    RngStream rng(11, 3);
    auto [x, xi] = sample_proposal(m, rng);
    CHECK((x - unwhiten(m, xi)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(centered_quadratic(m, x) == doctest::Approx(0.5 * xi.squaredNorm()).epsilon(1e-12));
  }
  SUBCASE("empirical covariance matches H^{-1}") {
    Eigen::Matrix2d h;
    h << 2.0, -1.0, -1.0, 1.0;  // inverse is [[1,1],[1,2]]
    ModeInfo m = make_mode_info(Eigen::Vector2d::Zero(), 0.0, h);
    const long n = 100000;
    double s00 = 0, s01 = 0, s11 = 0;
    for (long k = 0; k < n; ++k) {
      RngStream rng(77, static_cast<std::uint64_t>(k));
      auto [x, xi] = sample_proposal(m, rng);
      s00 += x[0] * x[0];
      s01 += x[0] * x[1];
      s11 += x[1] * x[1];
    }
    const double nn = static_cast<double>(n);
    // 3 standard errors of each covariance entry
    CHECK(std::abs(s00 / nn - 1.0) < 3.0 * std::sqrt(2.0 / nn));
    CHECK(std::abs(s01 / nn - 1.0) < 3.0 * std::sqrt(3.0 / nn));
    CHECK(std::abs(s11 / nn - 2.0) < 3.0 * std::sqrt(8.0 / nn));
  }
}

TEST_CASE("wick expectation") {
  SUBCASE("one-dimensional sixth moment") {
    Eigen::MatrixXd cov(1, 1);
    cov << 2.0;
    Monomial m{{0, 0, 0, 0, 0, 0}};
    CHECK(wick_expectation(m, cov) == doctest::Approx(15.0 * 8.0));  // 15 sigma^6
  }
  SUBCASE("single pairing") {
    Eigen::MatrixXd cov(2, 2);
    cov << 1.0, 0.37, 0.37, 2.0;
    CHECK(wick_expectation(Monomial{{0, 1}}, cov) == doctest::Approx(0.37));
  }
  SUBCASE("X1^2 X2^2 with identity covariance") {
    CHECK(wick_expectation(Monomial{{0, 0, 1, 1}}, Eigen::MatrixXd::Identity(2, 2)) ==
          doctest::Approx(1.0));
  }
  SUBCASE("odd degree vanishes, empty product is one") {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(2, 2);
    CHECK(wick_expectation(Monomial{{0, 0, 1}}, cov) == 0.0);
    CHECK(wick_expectation(Monomial{{}}, cov) == 1.0);
  }
  SUBCASE("(2n-1)!! scaling") {
    Eigen::MatrixXd cov(1, 1);
    cov << 1.7;
    double dfact = 1.0;
    for (int n = 1; n <= 6; ++n) {
      dfact *= 2 * n - 1;
      Monomial m{std::vector<int>(2 * n, 0)};
      CHECK(wick_expectation(m, cov) ==
            doctest::Approx(dfact * std::pow(1.7, n)).epsilon(1e-12));
    }
  }
  SUBCASE("permutation invariance") {
    Eigen::MatrixXd a(3, 3);
    a << 1.0, 0.2, -0.1, 0.0, 0.8, 0.3, 0.1, -0.2, 1.1;
    Eigen::MatrixXd cov = a * a.transpose();
    std::vector<int> idx = {0, 1, 1, 2, 0, 2};
    const double base = wick_expectation(Monomial{idx}, cov);
    std::sort(idx.begin(), idx.end());
    do {
      CHECK(wick_expectation(Monomial{idx}, cov) == doctest::Approx(base).epsilon(1e-12));
    } while (std::next_permutation(idx.begin(), idx.end()));
  }
  SUBCASE("degree cap") {
    Monomial big{std::vector<int>(18, 0)};
    CHECK_THROWS_AS(wick_expectation(big, Eigen::MatrixXd::Identity(1, 1)),
                    std::invalid_argument);
  }
}

TEST_CASE("rational reduction factor") {
  CHECK(rational_reduction_factor(2, 3, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(rational_reduction_factor(6, 2, 2) == doctest::Approx(1.0 / 24.0));
  const double d = 1e6;
  CHECK(std::abs(rational_reduction_factor(6, static_cast<int>(d), 2) * d * d - 1.0) < 1e-5);
  CHECK_THROWS_AS(rational_reduction_factor(2, 1, 2), std::invalid_argument);
  CHECK_THROWS_AS(rational_reduction_factor(4, 1, 3), std::invalid_argument);
}

namespace {

double monomial_value(const Monomial& mono, const Eigen::VectorXd& xi) {
  double v = 1.0;
  for (int i : mono.indices) v *= xi[i];
  return v;
}

}  // namespace

TEST_CASE("Gaussian integral identity (q+d) E f = E |xi|^2 f") {
  struct Case {
    int d;
    Monomial mono;
  };
  const std::vector<Case> cases = {
      {1, Monomial{{0, 0}}},          {2, Monomial{{0, 1}}},
      {2, Monomial{{0, 0, 1, 1}}},    {3, Monomial{{0, 0, 1, 1, 2, 2}}},
      {4, Monomial{{0, 1, 2, 2, 3, 3}}},
  };
  for (const auto& c : cases) {
    const int q = c.mono.degree();

    // exact equality through the pairing sums
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(c.d, c.d);
    double rhs_exact = 0.0;
    for (int i = 0; i < c.d; ++i) {
      Monomial ext = c.mono;
      ext.indices.push_back(i);
      ext.indices.push_back(i);
      rhs_exact += wick_expectation(ext, eye);
    }
    const double lhs_exact = (q + c.d) * wick_expectation(c.mono, eye);
    CHECK(lhs_exact == doctest::Approx(rhs_exact).epsilon(1e-12));

    // Monte Carlo: the paired difference has mean 0 within 4 SE
    const long n = 100000;
    std::vector<double> diff(n);
    for (long k = 0; k < n; ++k) {
      RngStream rng(901 + c.d, static_cast<std::uint64_t>(k));
      Eigen::VectorXd xi = sample_standard_normal(rng, c.d);
      const double f = monomial_value(c.mono, xi);
      diff[k] = (q + c.d) * f - xi.squaredNorm() * f;
    }
    CHECK(std::abs(mean_of(diff)) < 4.0 * se_of_mean(diff) + 1e-12);
  }
}
