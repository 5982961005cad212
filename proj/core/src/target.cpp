#include "imsam/target.hpp"

#include <cmath>

namespace imsam {

ModeInfo make_mode_info(Eigen::VectorXd x_star, double g_star, const Eigen::MatrixXd& hessian) {
  const auto d = x_star.size();
  if (hessian.rows() != d || hessian.cols() != d)
    throw std::invalid_argument("make_mode_info: hessian shape does not match x_star");
  if (!std::isfinite(g_star)) throw std::invalid_argument("make_mode_info: g_star not finite");

  const double scale = std::max(hessian.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (hessian - hessian.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * scale)
    throw std::invalid_argument("make_mode_info: hessian asymmetry exceeds 1e-8 relative");

  Eigen::MatrixXd sym = 0.5 * (hessian + hessian.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("make_mode_info: hessian not positive definite");

  ModeInfo m;
  m.x_star = std::move(x_star);
  m.g_star = g_star;
  m.hessian = std::move(sym);
  m.chol = llt.matrixL();
  return m;
}

double eval_potential(const TargetDensity& t, const Eigen::VectorXd& x) {
  if (x.size() != t.dim())
    throw std::invalid_argument("eval_potential: x has wrong dimension");
  return t.potential(x);
}

double centered_quadratic(const ModeInfo& m, const Eigen::VectorXd& x) {
  if (x.size() != m.x_star.size())
    throw std::invalid_argument("centered_quadratic: x has wrong dimension");
  // 0.5 |L^T (x - x*)|^2; the whole computation is even in (x - x*), so
  // reflecting about the mode negates eta and leaves the result unchanged.
  Eigen::VectorXd eta = m.chol.transpose().triangularView<Eigen::Upper>() * (x - m.x_star);
  return 0.5 * eta.squaredNorm();
}

}  // namespace imsam
