#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "imsam/gaussian.hpp"
#include "imsam/target.hpp"

namespace imsam {

enum class Method { LinearMap, SymmetrizedLinearMap, RandomMap, SymmetrizedRandomMap };

/// Short names used in configs, CSV output and plots: lm, slm, rm, srm.
std::string_view method_name(Method m);
std::optional<Method> parse_method(std::string_view name);

struct WeightedSample {
  Eigen::VectorXd x;         // emitted point
  double log_weight = 0.0;
  Eigen::VectorXd xi;        // underlying standard-normal draw
  std::optional<double> lambda_plus;   // stretch factor along +xi
  std::optional<double> lambda_minus;  // stretch factor along -xi
  bool chose_minus = false;            // symmetrized methods: emitted the reflected point
};

struct LambdaOptions {
  double rel_tol = 1e-12;       // must lie in (0, 1e-6]
  int max_iters = 100;
  double bracket_growth = 2.0;  // > 1
  double initial_guess = 1.0;
};

class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LambdaSolveError : public SamplerError {
 public:
  enum class Kind {
    NoBracket,      // level set not star-shaped along this ray: no root below the cap
    NonMonotone,    // multiple crossings detected in the bracket
    NoConvergence,  // tolerance not reached within max_iters
  };

  LambdaSolveError(Kind kind, const std::string& msg) : SamplerError(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Per-sample failure inside draw_ensemble, tagged with the stream it came from.
class EnsembleError : public SamplerError {
 public:
  EnsembleError(std::uint64_t stream_id, const std::string& msg)
      : SamplerError("stream_id " + std::to_string(stream_id) + ": " + msg),
        stream_id_(stream_id) {}
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t stream_id_;
};

/// View of a target in mode-centred whitened coordinates eta = L^T (x - x*):
/// phi(eta) = G(unwhiten(eta)) - g*, with phi(0) = 0 and unit Hessian at the
/// origin. All four samplers run through this view. Holds non-owning
/// references; the target and mode must outlive it.
class WhitenedPotential {
 public:
  WhitenedPotential(const TargetDensity& t, const ModeInfo& m) : target_(&t), mode_(&m) {}

  int dim() const { return mode_->dim(); }
  const ModeInfo& mode() const { return *mode_; }

  double operator()(const Eigen::VectorXd& eta) const;
  bool has_gradient() const { return target_->has_gradient(); }
  /// grad phi(eta) = L^{-1} grad G(x) when the target has an analytic
  /// gradient, central differences of phi otherwise.
  Eigen::VectorXd gradient(const Eigen::VectorXd& eta) const;
  /// dir^T grad phi(eta); one 1-D central difference in the FD case.
  double directional_derivative(const Eigen::VectorXd& eta, const Eigen::VectorXd& dir) const;

 private:
  const TargetDensity* target_;
  const ModeInfo* mode_;
};

/// Solves the stretch condition phi(lambda xi) = 0.5 |xi|^2 for lambda > 0.
///
/// Expands a bracket [0, hi] geometrically from the initial guess, verifies
/// that phi is increasing along the ray at 8 interior points, then runs
/// safeguarded Newton (bisection whenever the Newton step leaves the
/// bracket). Throws LambdaSolveError: NoBracket when no hi with
/// g(hi) >= target exists below initial_guess * growth^max_iters,
/// NonMonotone when the ray check fails.
double solve_lambda(const TargetDensity& t, const ModeInfo& m, const Eigen::VectorXd& xi,
                    const LambdaOptions& opts = {});

/// log((e^{l+} + e^{l-}) / 2), computed as max + log1p(exp(min - max)) - log 2.
/// Never overflows; throws SamplerError if both arguments are -inf.
double stable_log_mean(double l_plus, double l_minus);

// ---------------------------------------------------------------------------
// Deterministic cores: fixed whitened draw in, weighted sample out. The
// rng-facing samplers below are thin shells over these; tests drive the cores
// directly with pinned draws.
// ---------------------------------------------------------------------------

/// Extra diagnostics from the symmetrized cores.
struct SymmetrizedDraw {
  WeightedSample sample;
  double p_plus = 0.0;       // probability of keeping the + branch
  double log_w_plus = 0.0;   // simple-method log-weight at +xi
  double log_w_minus = 0.0;  // simple-method log-weight at -xi
};

WeightedSample linear_map_at(const TargetDensity& t, const ModeInfo& m, const Eigen::VectorXd& xi);
SymmetrizedDraw symmetrized_linear_map_at(const TargetDensity& t, const ModeInfo& m,
                                          const Eigen::VectorXd& xi, double select_uniform);
WeightedSample random_map_at(const TargetDensity& t, const ModeInfo& m, const Eigen::VectorXd& xi,
                             const LambdaOptions& opts = {});
SymmetrizedDraw symmetrized_random_map_at(const TargetDensity& t, const ModeInfo& m,
                                          const Eigen::VectorXd& xi, double select_uniform,
                                          const LambdaOptions& opts = {});

// ---------------------------------------------------------------------------
// Samplers: one weighted sample per call, consuming the given stream.
// ---------------------------------------------------------------------------

WeightedSample linear_map_sample(const TargetDensity& t, const ModeInfo& m, RngStream& rng);
WeightedSample symmetrized_linear_map_sample(const TargetDensity& t, const ModeInfo& m,
                                             RngStream& rng);
WeightedSample random_map_sample(const TargetDensity& t, const ModeInfo& m, RngStream& rng);
WeightedSample symmetrized_random_map_sample(const TargetDensity& t, const ModeInfo& m,
                                             RngStream& rng);

WeightedSample draw_sample(Method method, const TargetDensity& t, const ModeInfo& m,
                           RngStream& rng);

/// n independent samples; sample k is drawn from RngStream(seed, k), so the
/// result is identical for any thread count (0 threads = hardware default).
/// A per-sample failure aborts the ensemble with an EnsembleError reporting
/// the lowest failing stream_id.
std::vector<WeightedSample> draw_ensemble(Method method, const TargetDensity& t, const ModeInfo& m,
                                          long n, std::uint64_t seed, int n_threads = 0);

std::vector<double> log_weights(const std::vector<WeightedSample>& samples);

}  // namespace imsam
