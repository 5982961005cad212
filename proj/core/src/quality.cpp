#include "imsam/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace imsam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double q_from_sums(double n, double s1, double s2) { return n * s2 / (s1 * s1) - 1.0; }

}  // namespace

QualityReport estimate_q(const std::vector<double>& log_weights) {
  const long n = static_cast<long>(log_weights.size());
  if (n < 2) throw std::invalid_argument("estimate_q: need at least 2 log-weights");

  double m = -kInf;
  for (double lw : log_weights) {
    if (std::isnan(lw) || lw == kInf)
      throw std::invalid_argument("estimate_q: log-weights must not be NaN or +inf");
    m = std::max(m, lw);
  }
  if (m == -kInf) throw std::invalid_argument("estimate_q: all weights are zero");

  std::vector<double> v(log_weights.size());
  double s1 = 0.0, s2 = 0.0;
  for (long i = 0; i < n; ++i) {
    v[i] = std::exp(log_weights[i] - m);
    s1 += v[i];
    s2 += v[i] * v[i];
  }

  QualityReport rep;
  rep.n_samples = n;
  rep.max_log_weight = m;
  rep.q_hat = q_from_sums(static_cast<double>(n), s1, s2);
  rep.effective_sample_fraction = std::clamp(1.0 / (1.0 + std::max(rep.q_hat, 0.0)), 0.0, 1.0);

  const long batches = std::min<long>(100, n);
  std::vector<double> leave_out(batches);
  double mean = 0.0;
  for (long b = 0; b < batches; ++b) {
    const long lo = n * b / batches;
    const long hi = n * (b + 1) / batches;
    double b1 = 0.0, b2 = 0.0;
    for (long i = lo; i < hi; ++i) {
      b1 += v[i];
      b2 += v[i] * v[i];
    }
    leave_out[b] = q_from_sums(static_cast<double>(n - (hi - lo)), s1 - b1, s2 - b2);
    mean += leave_out[b];
  }
  mean /= static_cast<double>(batches);
  double ss = 0.0;
  for (double q : leave_out) ss += (q - mean) * (q - mean);
  rep.q_se = std::sqrt(ss * static_cast<double>(batches - 1) / static_cast<double>(batches));
  return rep;
}

std::pair<double, double> fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit_slope: size mismatch");
  const long n = static_cast<long>(xs.size());
  if (n < 2) throw std::invalid_argument("fit_slope: need at least 2 points");

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (long i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw std::invalid_argument("fit_slope: inputs must be positive");
    const double lx = std::log(xs[i]);
    const double ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit_slope: degenerate abscissae");
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  return {slope, intercept};
}

double variance_lemma_check(const std::vector<double>& u1, const std::vector<double>& u2, double r,
                            const std::vector<double>& eps_grid) {
  if (u1.size() != u2.size()) throw std::invalid_argument("variance_lemma_check: size mismatch");
  const long n = static_cast<long>(u1.size());
  if (n < 2) throw std::invalid_argument("variance_lemma_check: need at least 2 samples");
  if (!(r > 0.0)) throw std::invalid_argument("variance_lemma_check: r must be positive");
  if (eps_grid.empty()) throw std::invalid_argument("variance_lemma_check: empty grid");
  for (double e : eps_grid)
    if (!(e > 0.0) || e > 1e-2)
      throw std::invalid_argument("variance_lemma_check: eps values must lie in (0, 1e-2]");

  double mean1 = 0.0;
  for (double a : u1) mean1 += a;
  mean1 /= static_cast<double>(n);
  double var1 = 0.0;
  for (double a : u1) var1 += (a - mean1) * (a - mean1);
  var1 /= static_cast<double>(n);
  if (var1 == 0.0) throw std::invalid_argument("variance_lemma_check: var(u1) is degenerate");

  double worst = 0.0;
  for (double eps : eps_grid) {
    const double er = std::pow(eps, r);
    const double e2r = er * er;
    double mean_u = 0.0;
    for (long i = 0; i < n; ++i) mean_u += 1.0 + er * u1[i] + e2r * u2[i];
    mean_u /= static_cast<double>(n);
    double var_u = 0.0;
    for (long i = 0; i < n; ++i) {
      const double d = 1.0 + er * u1[i] + e2r * u2[i] - mean_u;
      var_u += d * d;
    }
    var_u /= static_cast<double>(n);
    const double q = var_u / (mean_u * mean_u);
    worst = std::max(worst, std::abs(q / (e2r * var1) - 1.0));
  }
  return worst;
}

}  // namespace imsam
