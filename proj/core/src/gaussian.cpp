#include "imsam/gaussian.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace imsam {

namespace {

// splitmix64 finalizer (Vigna); full-avalanche mix of a 64-bit word.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  // Two mixing rounds decorrelate nearby (seed, stream) keys. The draws are
  // then the splitmix64 sequence started at key_, addressable by counter.
  key_ = mix64(mix64(seed + kGolden) ^ (stream_id + 0x6a09e667f3bcc909ULL));
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::next_uniform() {
  // 53-bit mantissa, offset by half a grid cell: strictly inside (0, 1).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_normal() {
  const double u = next_uniform();
  return std::numbers::sqrt2 * boost::math::erf_inv(2.0 * u - 1.0);
}

Eigen::VectorXd sample_standard_normal(RngStream& rng, int d) {
  if (d < 1) throw std::invalid_argument("sample_standard_normal: d must be >= 1");
  Eigen::VectorXd xi(d);
  for (int i = 0; i < d; ++i) xi[i] = rng.next_normal();
  return xi;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_proposal(const ModeInfo& m, RngStream& rng) {
  Eigen::VectorXd xi = sample_standard_normal(rng, m.dim());
  return {unwhiten(m, xi), std::move(xi)};
}

Eigen::VectorXd whiten(const ModeInfo& m, const Eigen::VectorXd& x) {
  if (x.size() != m.x_star.size()) throw std::invalid_argument("whiten: wrong dimension");
  return m.chol.transpose().triangularView<Eigen::Upper>() * (x - m.x_star);
}

Eigen::VectorXd unwhiten(const ModeInfo& m, const Eigen::VectorXd& eta) {
  if (eta.size() != m.x_star.size()) throw std::invalid_argument("unwhiten: wrong dimension");
  Eigen::VectorXd y =
      m.chol.transpose().triangularView<Eigen::Upper>().solve(eta);
  return m.x_star + y;
}

namespace {

// Sum over pairings, always pairing the lowest unpaired index first so each
// perfect matching is generated exactly once.
double wick_recurse(std::vector<int>& idx, std::vector<bool>& used, int n_left,
                    const Eigen::MatrixXd& cov) {
  if (n_left == 0) return 1.0;
  std::size_t first = 0;
  while (used[first]) ++first;
  used[first] = true;
  double total = 0.0;
  for (std::size_t j = first + 1; j < idx.size(); ++j) {
    if (used[j]) continue;
    used[j] = true;
    total += cov(idx[first], idx[j]) * wick_recurse(idx, used, n_left - 2, cov);
    used[j] = false;
  }
  used[first] = false;
  return total;
}

}  // namespace

double wick_expectation(const Monomial& mono, const Eigen::MatrixXd& cov) {
  const int deg = mono.degree();
  if (deg % 2 != 0) return 0.0;
  if (deg == 0) return 1.0;
  if (deg > 16)
    throw std::invalid_argument(
        "wick_expectation: degree > 16 rejected; use Monte Carlo estimation");
  if (cov.rows() != cov.cols()) throw std::invalid_argument("wick_expectation: cov not square");
  for (int i : mono.indices)
    if (i < 0 || i >= cov.rows())
      throw std::invalid_argument("wick_expectation: index out of range");

  std::vector<int> idx = mono.indices;
  std::vector<bool> used(idx.size(), false);
  return wick_recurse(idx, used, deg, cov);
}

double rational_reduction_factor(int p, int d, int k) {
  if (k != 1 && k != 2) throw std::invalid_argument("rational_reduction_factor: k must be 1 or 2");
  if (p - 2 * k + d <= 0)
    throw std::invalid_argument("rational_reduction_factor: nonpositive denominator");
  if (k == 1) return 1.0 / (p - 2 + d);
  return 1.0 / (static_cast<double>(p - 4 + d) * static_cast<double>(p - 2 + d));
}

}  // namespace imsam
