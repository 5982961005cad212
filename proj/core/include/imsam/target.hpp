#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <utility>

namespace imsam {

/// Target density in potential form, p(x) proportional to exp(-G(x)) on R^d.
///
/// G is the working potential: any noise parameter is folded in by the
/// problem that constructs the target (G = F/epsilon), so samplers are
/// epsilon-agnostic. The epsilon stored here is metadata for reporting.
/// Optional analytic gradient and Hessian evaluators may be supplied;
/// when present they must agree with finite differences of G.
///
/// Evaluators must be pure functions of x. Instances are immutable after
/// construction and safe to share across threads.
class TargetDensity {
 public:
  using Potential = std::function<double(const Eigen::VectorXd&)>;
  using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using Hessian = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

  TargetDensity(int dim, double epsilon, Potential potential,
                Gradient gradient = nullptr, Hessian hessian = nullptr)
      : dim_(dim),
        epsilon_(epsilon),
        potential_(std::move(potential)),
        gradient_(std::move(gradient)),
        hessian_(std::move(hessian)) {
    if (dim_ < 1) throw std::invalid_argument("TargetDensity: dim must be >= 1");
    if (!(epsilon_ >= 0.0)) throw std::invalid_argument("TargetDensity: epsilon must be >= 0");
    if (!potential_) throw std::invalid_argument("TargetDensity: potential evaluator required");
  }

  int dim() const { return dim_; }
  double epsilon() const { return epsilon_; }
  bool has_gradient() const { return static_cast<bool>(gradient_); }
  bool has_hessian() const { return static_cast<bool>(hessian_); }

  double potential(const Eigen::VectorXd& x) const { return potential_(x); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    if (!gradient_) throw std::logic_error("TargetDensity: no analytic gradient");
    return gradient_(x);
  }
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const {
    if (!hessian_) throw std::logic_error("TargetDensity: no analytic hessian");
    return hessian_(x);
  }

 private:
  int dim_;
  double epsilon_;
  Potential potential_;
  Gradient gradient_;
  Hessian hessian_;
};

/// Mode of a target: minimizer, minimum value, Hessian and its Cholesky
/// factor. Anchors the local Gaussian approximation. Immutable once built.
struct ModeInfo {
  Eigen::VectorXd x_star;
  double g_star = 0.0;
  Eigen::MatrixXd hessian;
  Eigen::MatrixXd chol;  // lower triangular, hessian = chol * chol^T

  int dim() const { return static_cast<int>(x_star.size()); }
};

/// Builds a ModeInfo, checking symmetry (relative asymmetry <= 1e-8) and
/// positive definiteness (Cholesky must succeed).
ModeInfo make_mode_info(Eigen::VectorXd x_star, double g_star, const Eigen::MatrixXd& hessian);

/// Evaluates the working potential G(x). Throws on dimension mismatch.
double eval_potential(const TargetDensity& t, const Eigen::VectorXd& x);

/// The Gaussian-approximation exponent 0.5 (x - x*)^T H (x - x*).
/// Exactly symmetric about the mode: same value at x and 2 x* - x.
double centered_quadratic(const ModeInfo& m, const Eigen::VectorXd& x);

}  // namespace imsam
