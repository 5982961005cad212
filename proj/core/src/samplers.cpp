#include "imsam/samplers.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "parallel_util.hpp"

namespace imsam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kFdStep = std::cbrt(std::numeric_limits<double>::epsilon());

double logistic(double z) {
  if (z == kInf) return 1.0;
  if (z == -kInf) return 0.0;
  return 1.0 / (1.0 + std::exp(-z));
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::LinearMap: return "lm";
    case Method::SymmetrizedLinearMap: return "slm";
    case Method::RandomMap: return "rm";
    case Method::SymmetrizedRandomMap: return "srm";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "lm") return Method::LinearMap;
  if (name == "slm") return Method::SymmetrizedLinearMap;
  if (name == "rm") return Method::RandomMap;
  if (name == "srm") return Method::SymmetrizedRandomMap;
  return std::nullopt;
}

double WhitenedPotential::operator()(const Eigen::VectorXd& eta) const {
  return eval_potential(*target_, unwhiten(*mode_, eta)) - mode_->g_star;
}

Eigen::VectorXd WhitenedPotential::gradient(const Eigen::VectorXd& eta) const {
  if (target_->has_gradient()) {
    // grad phi(eta) = L^{-1} grad G(x)
    Eigen::VectorXd gx = target_->gradient(unwhiten(*mode_, eta));
    return mode_->chol.triangularView<Eigen::Lower>().solve(gx);
  }
  const int d = dim();
  Eigen::VectorXd g(d);
  Eigen::VectorXd p = eta;
  for (int i = 0; i < d; ++i) {
    const double hi = kFdStep * std::max(1.0, std::abs(eta[i]));
    const double ei = eta[i];
    p[i] = ei + hi;
    const double fp = (*this)(p);
    p[i] = ei - hi;
    const double fm = (*this)(p);
    p[i] = ei;
    g[i] = (fp - fm) / (2.0 * hi);
  }
  return g;
}

double WhitenedPotential::directional_derivative(const Eigen::VectorXd& eta,
                                                 const Eigen::VectorXd& dir) const {
  if (target_->has_gradient()) return dir.dot(gradient(eta));
  const double dir_norm = dir.norm();
  if (dir_norm == 0.0) return 0.0;
  const double h = kFdStep * std::max(1.0, eta.norm() / dir_norm);
  return ((*this)(eta + h * dir) - (*this)(eta - h * dir)) / (2.0 * h);
}

double stable_log_mean(double l_plus, double l_minus) {
  if (std::isnan(l_plus) || std::isnan(l_minus))
    throw SamplerError("stable_log_mean: NaN log-weight");
  const double hi = std::max(l_plus, l_minus);
  const double lo = std::min(l_plus, l_minus);
  if (hi == -kInf) throw SamplerError("stable_log_mean: both weights underflow to zero");
  if (lo == -kInf) return hi - std::numbers::ln2;
  return hi + std::log1p(std::exp(lo - hi)) - std::numbers::ln2;
}

double solve_lambda(const TargetDensity& t, const ModeInfo& m, const Eigen::VectorXd& xi,
                    const LambdaOptions& opts) {
  if (!(opts.rel_tol > 0.0) || opts.rel_tol > 1e-6)
    throw std::invalid_argument("solve_lambda: rel_tol must lie in (0, 1e-6]");
  if (opts.max_iters < 1 || !(opts.bracket_growth > 1.0) || !(opts.initial_guess > 0.0))
    throw std::invalid_argument("solve_lambda: bad options");
  const double target = 0.5 * xi.squaredNorm();
  if (!(target > 0.0)) throw std::invalid_argument("solve_lambda: xi must be nonzero");

  const WhitenedPotential phi(t, m);
  auto g = [&](double lam) { return phi(lam * xi); };
  const double tol = opts.rel_tol * target;

  double lam = opts.initial_guess;
  double g_lam = g(lam);
  if (std::abs(g_lam - target) <= tol) return lam;

  // Bracket the crossing: g(0) = 0 < target, expand hi until g(hi) >= target.
  double hi = lam, g_hi = g_lam;
  if (g_lam < target) {
    bool bracketed = false;
    for (int k = 0; k < opts.max_iters && !bracketed; ++k) {
      hi *= opts.bracket_growth;
      g_hi = g(hi);
      bracketed = g_hi >= target;
    }
    if (!bracketed)
      throw LambdaSolveError(LambdaSolveError::Kind::NoBracket,
                             "solve_lambda: no bracket below initial_guess * growth^max_iters; "
                             "level set not star-shaped along this ray");
  }

  // Star-shapedness guard: g must be increasing on [0, hi]. The probes also
  // tighten the bracket around the crossing.
  double a = 0.0, g_a = 0.0;
  double b = hi, g_b = g_hi;
  {
    const double slack = 1e-12 * (std::abs(target) + 1.0);
    double prev = 0.0;
    bool crossed = false;
    for (int i = 1; i <= 8; ++i) {
      const double p = hi * static_cast<double>(i) / 9.0;
      const double v = g(p);
      if (v < prev - slack)
        throw LambdaSolveError(LambdaSolveError::Kind::NonMonotone,
                               "solve_lambda: potential not monotone along the ray; "
                               "stretch condition has multiple roots");
      prev = v;
      if (!crossed && v < target) {
        a = p;
        g_a = v;
      } else if (!crossed) {
        crossed = true;
        b = p;
        g_b = v;
      }
    }
  }

  // Safeguarded Newton in [a, b]; any step outside the bracket bisects.
  lam = g_b > g_a ? a + (b - a) * (target - g_a) / (g_b - g_a) : 0.5 * (a + b);
  if (!(lam > a) || !(lam < b)) lam = 0.5 * (a + b);
  g_lam = g(lam);
  for (int it = 0; it < opts.max_iters; ++it) {
    if (std::abs(g_lam - target) <= tol) return lam;
    if (g_lam < target) {
      a = lam;
      g_a = g_lam;
    } else {
      b = lam;
      g_b = g_lam;
    }
    double next = std::numeric_limits<double>::quiet_NaN();
    const double deriv = phi.directional_derivative(lam * xi, xi);
    if (deriv > 0.0) next = lam + (target - g_lam) / deriv;
    if (!std::isfinite(next) || !(next > a) || !(next < b)) next = 0.5 * (a + b);
    lam = next;
    g_lam = g(lam);
  }
  throw LambdaSolveError(LambdaSolveError::Kind::NoConvergence,
                         "solve_lambda: tolerance not reached within max_iters");
}

namespace {

// Simple linear-map log-weight at a whitened draw.
double linear_log_weight(const TargetDensity& t, const ModeInfo& m, const Eigen::VectorXd& xi,
                         Eigen::VectorXd& x_out) {
  x_out = unwhiten(m, xi);
  const double g = eval_potential(t, x_out);
  if (std::isnan(g) || g == -kInf)
    throw SamplerError("linear map: potential not evaluable at proposal point");
  return -(g - m.g_star) + 0.5 * xi.squaredNorm();
}

// Simple random-map log-weight for a solved stretch factor:
// (d-1) log(lambda) + log|xi|^2 - log(xi^T grad phi(lambda xi)).
double random_log_weight(const WhitenedPotential& phi, const Eigen::VectorXd& xi, double lambda) {
  const Eigen::VectorXd eta = lambda * xi;
  // Analytic chain rule through the whitening map when the target supplies a
  // gradient; otherwise one finite-difference gradient of phi at lambda xi.
  const double denom = xi.dot(phi.gradient(eta));
  if (!(denom > 0.0))
    throw SamplerError("random map: xi^T grad phi(lambda xi) <= 0; "
                       "level-set crossing is not transverse");
  const int d = phi.dim();
  const double lw =
      (d - 1) * std::log(lambda) + std::log(xi.squaredNorm()) - std::log(denom);
  if (!std::isfinite(lw)) throw SamplerError("random map: non-finite log-weight");
  return lw;
}

}  // namespace

WeightedSample linear_map_at(const TargetDensity& t, const ModeInfo& m,
                             const Eigen::VectorXd& xi) {
  WeightedSample s;
  s.log_weight = linear_log_weight(t, m, xi, s.x);
  if (!std::isfinite(s.log_weight)) throw SamplerError("linear map: non-finite log-weight");
  s.xi = xi;
  return s;
}

SymmetrizedDraw symmetrized_linear_map_at(const TargetDensity& t, const ModeInfo& m,
                                          const Eigen::VectorXd& xi, double select_uniform) {
  Eigen::VectorXd x_plus, x_minus;
  const double l_plus = linear_log_weight(t, m, xi, x_plus);
  const double l_minus = linear_log_weight(t, m, -xi, x_minus);

  SymmetrizedDraw d;
  d.log_w_plus = l_plus;
  d.log_w_minus = l_minus;
  d.p_plus = logistic(l_plus - l_minus);
  d.sample.log_weight = stable_log_mean(l_plus, l_minus);
  d.sample.chose_minus = select_uniform >= d.p_plus;
  d.sample.x = d.sample.chose_minus ? std::move(x_minus) : std::move(x_plus);
  d.sample.xi = xi;
  return d;
}

WeightedSample random_map_at(const TargetDensity& t, const ModeInfo& m, const Eigen::VectorXd& xi,
                             const LambdaOptions& opts) {
  const double lambda = solve_lambda(t, m, xi, opts);
  const WhitenedPotential phi(t, m);
  WeightedSample s;
  s.log_weight = random_log_weight(phi, xi, lambda);
  s.x = unwhiten(m, lambda * xi);
  s.xi = xi;
  s.lambda_plus = lambda;
  return s;
}

SymmetrizedDraw symmetrized_random_map_at(const TargetDensity& t, const ModeInfo& m,
                                          const Eigen::VectorXd& xi, double select_uniform,
                                          const LambdaOptions& opts) {
  const double lambda_plus = solve_lambda(t, m, xi, opts);
  // The solved stretch factor is a good starting guess on the mirrored ray.
  LambdaOptions mirrored = opts;
  mirrored.initial_guess = lambda_plus;
  const double lambda_minus = solve_lambda(t, m, -xi, mirrored);

  const WhitenedPotential phi(t, m);
  const double l_plus = random_log_weight(phi, xi, lambda_plus);
  const double l_minus = random_log_weight(phi, -xi, lambda_minus);

  SymmetrizedDraw d;
  d.log_w_plus = l_plus;
  d.log_w_minus = l_minus;
  d.p_plus = logistic(l_plus - l_minus);
  d.sample.log_weight = stable_log_mean(l_plus, l_minus);
  d.sample.chose_minus = select_uniform >= d.p_plus;
  d.sample.x = unwhiten(m, d.sample.chose_minus ? Eigen::VectorXd(-lambda_minus * xi)
                                                : Eigen::VectorXd(lambda_plus * xi));
  d.sample.xi = xi;
  d.sample.lambda_plus = lambda_plus;
  d.sample.lambda_minus = lambda_minus;
  return d;
}

WeightedSample linear_map_sample(const TargetDensity& t, const ModeInfo& m, RngStream& rng) {
  return linear_map_at(t, m, sample_standard_normal(rng, m.dim()));
}

WeightedSample symmetrized_linear_map_sample(const TargetDensity& t, const ModeInfo& m,
                                             RngStream& rng) {
  Eigen::VectorXd xi = sample_standard_normal(rng, m.dim());
  const double u = rng.next_uniform();
  return symmetrized_linear_map_at(t, m, xi, u).sample;
}

WeightedSample random_map_sample(const TargetDensity& t, const ModeInfo& m, RngStream& rng) {
  return random_map_at(t, m, sample_standard_normal(rng, m.dim()));
}

WeightedSample symmetrized_random_map_sample(const TargetDensity& t, const ModeInfo& m,
                                             RngStream& rng) {
  Eigen::VectorXd xi = sample_standard_normal(rng, m.dim());
  const double u = rng.next_uniform();
  return symmetrized_random_map_at(t, m, xi, u).sample;
}

WeightedSample draw_sample(Method method, const TargetDensity& t, const ModeInfo& m,
                           RngStream& rng) {
  switch (method) {
    case Method::LinearMap: return linear_map_sample(t, m, rng);
    case Method::SymmetrizedLinearMap: return symmetrized_linear_map_sample(t, m, rng);
    case Method::RandomMap: return random_map_sample(t, m, rng);
    case Method::SymmetrizedRandomMap: return symmetrized_random_map_sample(t, m, rng);
  }
  throw std::invalid_argument("draw_sample: unknown method");
}

std::vector<WeightedSample> draw_ensemble(Method method, const TargetDensity& t, const ModeInfo& m,
                                          long n, std::uint64_t seed, int n_threads) {
  if (n < 1) throw std::invalid_argument("draw_ensemble: n must be >= 1");
  std::vector<WeightedSample> out(static_cast<std::size_t>(n));
  detail::parallel_for_indexed(n, n_threads, [&](long k) {
    RngStream rng(seed, static_cast<std::uint64_t>(k));
    try {
      out[static_cast<std::size_t>(k)] = draw_sample(method, t, m, rng);
    } catch (const EnsembleError&) {
      throw;
    } catch (const std::exception& e) {
      throw EnsembleError(static_cast<std::uint64_t>(k), e.what());
    }
  });
  return out;
}

std::vector<double> log_weights(const std::vector<WeightedSample>& samples) {
  std::vector<double> lw(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) lw[i] = samples[i].log_weight;
  return lw;
}

}  // namespace imsam
