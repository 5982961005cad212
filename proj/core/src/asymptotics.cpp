#include "imsam/asymptotics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "imsam/gaussian.hpp"
#include "parallel_util.hpp"

namespace imsam {

namespace {

// Base ray step: epsilon_mach^(1/8) balances truncation against roundoff for
// the fourth-derivative stencil.
const double kRayStep = std::pow(std::numeric_limits<double>::epsilon(), 0.125);

// 7-point central stencils on offsets -3h..3h (center weight is zero for the
// third derivative and multiplies phi(0) = 0 for the fourth, so the center
// evaluation is skipped).
//   g'''(0)  ~ [  1/8, -1, 13/8, 0, -13/8,  1, -1/8] / h^3
//   g''''(0) ~ [ -1/6,  2, -13/2, 28/3, -13/2, 2, -1/6] / h^4
struct RayDerivatives {
  double d3;
  double d4;
};

RayDerivatives ray_derivatives(const WhitenedPotential& phi, const Eigen::VectorXd& dir,
                               double h) {
  const double offs[6] = {-3.0, -2.0, -1.0, 1.0, 2.0, 3.0};
  double vals[6];
  for (int i = 0; i < 6; ++i) {
    vals[i] = phi((offs[i] * h) * dir);
    if (!std::isfinite(vals[i]))
      throw std::runtime_error("taylor_ray_coefficients: non-finite probe value");
  }
  const double d3 =
      (0.125 * vals[0] - vals[1] + 1.625 * vals[2] - 1.625 * vals[3] + vals[4] - 0.125 * vals[5]) /
      (h * h * h);
  const double d4 = (-(vals[0] + vals[5]) / 6.0 + 2.0 * (vals[1] + vals[4]) -
                     6.5 * (vals[2] + vals[3])) /
                    (h * h * h * h);
  return {d3, d4};
}

RayCoefficients ray_coefficients_whitened(const WhitenedPotential& phi,
                                          const Eigen::VectorXd& dir) {
  if (dir.squaredNorm() == 0.0) return {0.0, 0.0, false};
  const RayDerivatives coarse = ray_derivatives(phi, dir, kRayStep);
  const RayDerivatives fine = ray_derivatives(phi, dir, 0.5 * kRayStep);

  RayCoefficients rc;
  rc.c3 = fine.d3 / 6.0;
  rc.c4 = fine.d4 / 24.0;
  const double scale = std::max({std::abs(fine.d4), std::abs(coarse.d4), 1e-8});
  rc.step_inconsistent = std::abs(fine.d4 - coarse.d4) > 0.01 * scale;
  return rc;
}

struct MomentSums {
  double c3sq = 0.0, c4 = 0.0, c3_4 = 0.0, c3sq_c4 = 0.0, c4sq = 0.0;
  double v = 0.0, vsq = 0.0;  // v = c4 - c3^2/2
  long n = 0;
  long warnings = 0;

  void add(const RayCoefficients& rc) {
    const double s3 = rc.c3 * rc.c3;
    c3sq += s3;
    c4 += rc.c4;
    c3_4 += s3 * s3;
    c3sq_c4 += s3 * rc.c4;
    c4sq += rc.c4 * rc.c4;
    const double vi = rc.c4 - 0.5 * s3;
    v += vi;
    vsq += vi * vi;
    ++n;
    if (rc.step_inconsistent) ++warnings;
  }
  MomentSums& operator+=(const MomentSums& o) {
    c3sq += o.c3sq;
    c4 += o.c4;
    c3_4 += o.c3_4;
    c3sq_c4 += o.c3sq_c4;
    c4sq += o.c4sq;
    v += o.v;
    vsq += o.vsq;
    n += o.n;
    warnings += o.warnings;
    return *this;
  }
};

// Statistics evaluated on total sums excluding one batch.
struct MomentStats {
  double e_c3sq, e_c4, var_v, e_c3_4, e_c3sq_c4, e_c4sq;
};

MomentStats stats_of(const MomentSums& s) {
  const double n = static_cast<double>(s.n);
  MomentStats st;
  st.e_c3sq = s.c3sq / n;
  st.e_c4 = s.c4 / n;
  st.e_c3_4 = s.c3_4 / n;
  st.e_c3sq_c4 = s.c3sq_c4 / n;
  st.e_c4sq = s.c4sq / n;
  const double mv = s.v / n;
  st.var_v = s.vsq / n - mv * mv;
  return st;
}

MomentSums minus(const MomentSums& total, const MomentSums& part) {
  MomentSums r = total;
  r.c3sq -= part.c3sq;
  r.c4 -= part.c4;
  r.c3_4 -= part.c3_4;
  r.c3sq_c4 -= part.c3sq_c4;
  r.c4sq -= part.c4sq;
  r.v -= part.v;
  r.vsq -= part.vsq;
  r.n -= part.n;
  return r;
}

}  // namespace

RayCoefficients taylor_ray_coefficients(const TargetDensity& t, const ModeInfo& m,
                                        const Eigen::VectorXd& x) {
  const WhitenedPotential phi(t, m);
  return ray_coefficients_whitened(phi, whiten(m, x));
}

TaylorMoments estimate_taylor_moments(const TargetDensity& t, const ModeInfo& m, long n,
                                      std::uint64_t seed, int n_threads) {
  if (n < 100) throw std::invalid_argument("estimate_taylor_moments: need n >= 100");
  const WhitenedPotential phi(t, m);
  const int d = m.dim();

  std::vector<RayCoefficients> coeffs(static_cast<std::size_t>(n));
  detail::parallel_for_indexed(n, n_threads, [&](long k) {
    RngStream rng(seed, static_cast<std::uint64_t>(k));
    coeffs[static_cast<std::size_t>(k)] =
        ray_coefficients_whitened(phi, sample_standard_normal(rng, d));
  });

  const long batches = std::min<long>(100, n);
  std::vector<MomentSums> per_batch(batches);
  MomentSums total;
  for (long b = 0; b < batches; ++b) {
    const long lo = n * b / batches;
    const long hi = n * (b + 1) / batches;
    for (long i = lo; i < hi; ++i) per_batch[b].add(coeffs[static_cast<std::size_t>(i)]);
    total += per_batch[b];
  }

  const MomentStats full = stats_of(total);
  TaylorMoments mom;
  mom.e_c3sq = full.e_c3sq;
  mom.e_c4 = full.e_c4;
  mom.var_c4_minus_half_c3sq = full.var_v;
  mom.e_c3_4 = full.e_c3_4;
  mom.e_c3sq_c4 = full.e_c3sq_c4;
  mom.e_c4sq = full.e_c4sq;
  mom.n_used = n;
  mom.n_step_warnings = total.warnings;

  // Jackknife over the batches for all six statistics at once.
  std::vector<MomentStats> jk(batches);
  MomentStats mean{0, 0, 0, 0, 0, 0};
  for (long b = 0; b < batches; ++b) {
    jk[b] = stats_of(minus(total, per_batch[b]));
    mean.e_c3sq += jk[b].e_c3sq;
    mean.e_c4 += jk[b].e_c4;
    mean.var_v += jk[b].var_v;
    mean.e_c3_4 += jk[b].e_c3_4;
    mean.e_c3sq_c4 += jk[b].e_c3sq_c4;
    mean.e_c4sq += jk[b].e_c4sq;
  }
  const double nb = static_cast<double>(batches);
  mean.e_c3sq /= nb;
  mean.e_c4 /= nb;
  mean.var_v /= nb;
  mean.e_c3_4 /= nb;
  mean.e_c3sq_c4 /= nb;
  mean.e_c4sq /= nb;
  double s_c3sq = 0, s_c4 = 0, s_var = 0, s_c3_4 = 0, s_c3sq_c4 = 0, s_c4sq = 0;
  for (const auto& j : jk) {
    s_c3sq += (j.e_c3sq - mean.e_c3sq) * (j.e_c3sq - mean.e_c3sq);
    s_c4 += (j.e_c4 - mean.e_c4) * (j.e_c4 - mean.e_c4);
    s_var += (j.var_v - mean.var_v) * (j.var_v - mean.var_v);
    s_c3_4 += (j.e_c3_4 - mean.e_c3_4) * (j.e_c3_4 - mean.e_c3_4);
    s_c3sq_c4 += (j.e_c3sq_c4 - mean.e_c3sq_c4) * (j.e_c3sq_c4 - mean.e_c3sq_c4);
    s_c4sq += (j.e_c4sq - mean.e_c4sq) * (j.e_c4sq - mean.e_c4sq);
  }
  const double f = (nb - 1.0) / nb;
  mom.se_c3sq = std::sqrt(f * s_c3sq);
  mom.se_c4 = std::sqrt(f * s_c4);
  mom.se_var = std::sqrt(f * s_var);
  mom.se_c3_4 = std::sqrt(f * s_c3_4);
  mom.se_c3sq_c4 = std::sqrt(f * s_c3sq_c4);
  mom.se_c4sq = std::sqrt(f * s_c4sq);
  return mom;
}

double predict_q(Method method, int d, double eps, const TaylorMoments& mom) {
  if (d < 1) throw std::invalid_argument("predict_q: d must be >= 1");
  const double dd = d;
  switch (method) {
    case Method::LinearMap:
      return eps * mom.e_c3sq;
    case Method::RandomMap:
      return eps * (1.0 + dd) * (1.0 + dd) / ((2.0 + dd) * (4.0 + dd)) * mom.e_c3sq;
    case Method::SymmetrizedLinearMap:
      return eps * eps * mom.var_c4_minus_half_c3sq;
    case Method::SymmetrizedRandomMap:
      break;
  }
  throw std::invalid_argument(
      "predict_q: no closed form for srm; use predict_q_symmetrized_random");
}

double predict_q_symmetrized_random(int d, double eps, const TaylorMoments& mom) {
  if (d < 1) throw std::invalid_argument("predict_q_symmetrized_random: d must be >= 1");
  const double dd = d;
  const double d2 = dd + 2.0, d4 = dd + 4.0, d6 = dd + 6.0, d8 = dd + 8.0, d10 = dd + 10.0;

  // var(A C3^2/|xi|^4 - B C4/|xi|^2) = var(first) - 2 cov + var(second),
  // with the rational expectations reduced to plain moments.
  const double var_c3_term =
      d2 * d2 * d4 * d4 / (4.0 * d4 * d6 * d8 * d10) * mom.e_c3_4 -
      0.25 * mom.e_c3sq * mom.e_c3sq;
  const double cov_term =
      d2 * d2 * d4 / (2.0 * d4 * d6 * d8) * mom.e_c3sq_c4 - 0.5 * mom.e_c3sq * mom.e_c4;
  const double var_c4_term = d2 * d2 / (d4 * d6) * mom.e_c4sq - mom.e_c4 * mom.e_c4;

  return eps * eps * (var_c3_term - 2.0 * cov_term + var_c4_term);
}

double randomwalk_closed_form(Method method, int n_dim, double alpha, double eps) {
  if (n_dim < 1) throw std::invalid_argument("randomwalk_closed_form: n_dim must be >= 1");
  const double n = n_dim;
  switch (method) {
    case Method::LinearMap:
      return 15.0 * alpha * alpha * n * eps;
    case Method::RandomMap:
      return 15.0 * alpha * alpha * eps * n * (n + 1.0) * (n + 1.0) / ((n + 2.0) * (n + 4.0));
    case Method::SymmetrizedLinearMap:
      return 112.5 * std::pow(alpha, 4) * n * n * eps * eps;
    case Method::SymmetrizedRandomMap:
      break;
  }
  throw std::invalid_argument("randomwalk_closed_form: no closed form for srm");
}

}  // namespace imsam
