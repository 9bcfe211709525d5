#include "medsens/ovb.hpp"

#include <cmath>

#include "medsens/error.hpp"

namespace medsens {

namespace {

constexpr double kBoundary = 1.0 - 1e-12;

void check_ball(const MatrixXd& r, const char* what) {
  if (!r.allFinite() || spectral_norm(r) >= kBoundary)
    throw Error(ErrorCode::BoundaryR, std::string(what) + " must lie strictly inside the unit ball");
}

}  // namespace

OvbMoments ovb_moments(const MatrixXd& y, const MatrixXd& a, const MatrixXd& c) {
  MatrixXd design = hcat({a, c});
  LsFit fit = ols_fit(y, design);
  OvbMoments m;
  m.theta_obs = fit.coefficients.topRows(a.cols()).transpose();
  m.cov_y_res = sample_cov(fit.residuals);
  m.cov_a_res = sample_cov(residualize(a, c));
  return m;
}

MatrixXd adjust_scalar_u(const OvbMoments& m, const ScalarUSensitivity& s) {
  if (s.r_y_u.size() != m.cov_y_res.rows() || s.r_a_u.size() != m.cov_a_res.rows())
    throw Error(ErrorCode::DimensionMismatch, "sensitivity dimensions do not match the moments");
  check_ball(s.r_a_u, "R_{a~u|c}");
  check_ball(s.r_y_u, "R_{y~u|a,c}");
  if (s.r_y_u.isZero(0.0) || s.r_a_u.isZero(0.0)) return m.theta_obs;
  const double denom = std::sqrt(1.0 - s.r_a_u.squaredNorm());
  MatrixXd bias = sym_sqrt(m.cov_y_res) * s.r_y_u * s.r_a_u.transpose() * sym_inv_sqrt(m.cov_a_res);
  return m.theta_obs - bias / denom;
}

MatrixXd cov_u_update(const MatrixXd& cov_u, const MatrixXd& r) {
  if (r.cols() != cov_u.rows()) throw Error(ErrorCode::DimensionMismatch, "R and cov(u) disagree on dim(u)");
  check_ball(r, "R_{a~u|c}");
  MatrixXd root = sym_sqrt(cov_u);
  MatrixXd out = cov_u - root * r.transpose() * r * root;
  return 0.5 * (out + out.transpose());
}

MatrixXd adjust_vector_u(const OvbMoments& m, const VectorUSensitivity& s) {
  const Eigen::Index du = s.r_y_u.cols();
  if (s.r_a_u.cols() != du || s.r_y_u.rows() != m.cov_y_res.rows() || s.r_a_u.rows() != m.cov_a_res.rows())
    throw Error(ErrorCode::DimensionMismatch, "sensitivity dimensions do not match the moments");
  MatrixXd cov_u = s.cov_u_perp_c.size() == 0 ? MatrixXd::Identity(du, du) : s.cov_u_perp_c;
  if (cov_u.rows() != du || cov_u.cols() != du)
    throw Error(ErrorCode::DimensionMismatch, "cov(u|c) must be dim(u) x dim(u)");
  require_positive_definite(cov_u, "cov(u|c)");
  check_ball(s.r_y_u, "R_{y~u|a,c}");
  MatrixXd cov_u_ac = cov_u_update(cov_u, s.r_a_u);
  if (s.r_y_u.isZero(0.0) || s.r_a_u.isZero(0.0)) return m.theta_obs;
  MatrixXd inv_root;
  try {
    inv_root = sym_inv_sqrt(cov_u_ac);
  } catch (const Error&) {
    throw Error(ErrorCode::ConfounderCovarianceDegenerate, "cov(u|a,c) is not positive definite");
  }
  MatrixXd bias = sym_sqrt(m.cov_y_res) * s.r_y_u * inv_root * sym_sqrt(cov_u) * s.r_a_u.transpose() *
                  sym_inv_sqrt(m.cov_a_res);
  return m.theta_obs - bias;
}

}  // namespace medsens
