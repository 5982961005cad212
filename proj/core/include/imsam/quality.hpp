#pragma once

#include <utility>
#include <vector>

namespace imsam {

struct QualityReport {
  double q_hat = 0.0;
  double q_se = 0.0;
  long n_samples = 0;
  double max_log_weight = 0.0;
  double effective_sample_fraction = 1.0;  // 1 / (1 + q_hat), clamped to (0, 1]
};

/// Estimates Q = E(w^2)/E(w)^2 - 1 from log-weights. The maximum log-weight
/// is subtracted before exponentiating, so the estimate is invariant under a
/// common shift. The standard error is a jackknife over 100 contiguous
/// batches (n batches when n < 100).
QualityReport estimate_q(const std::vector<double>& log_weights);

/// Ordinary least squares of log y against log x (natural logs).
/// Returns (slope, intercept). All inputs must be positive, at least 2 points.
std::pair<double, double> fit_slope(const std::vector<double>& xs, const std::vector<double>& ys);

/// Checks the cancellation that makes Q insensitive to the second-order
/// term: builds u = 1 + eps^r u1 + eps^{2r} u2 over the grid, computes
/// Q = E(u^2)/E(u)^2 - 1 on the sample set, and compares against
/// eps^{2r} var(u1). Returns the largest relative deviation of the ratio
/// from 1 over the grid. Throws when var(u1) is degenerate.
double variance_lemma_check(const std::vector<double>& u1, const std::vector<double>& u2, double r,
                            const std::vector<double>& eps_grid);

}  // namespace imsam
