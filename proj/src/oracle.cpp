#include "medsens/oracle.hpp"

#include <cmath>
#include <random>

#include "medsens/error.hpp"

namespace medsens {

MatrixXd construct_from_blocks(const std::vector<MatrixXd>& blocks, const std::vector<MatrixXd>& targets,
                               const MatrixXd& span, const MatrixXd& cov_u_perp_c) {
  if (blocks.size() != targets.size()) throw Error(ErrorCode::DimensionMismatch, "one target per block");
  const Eigen::Index n = span.rows(), du = cov_u_perp_c.rows();
  if (n < span.cols() + du + 1)
    throw Error(ErrorCode::InsufficientSamples, "no room for an orthogonal completion");
  require_positive_definite(cov_u_perp_c, "cov(u|c)");

  MatrixXd u = MatrixXd::Zero(n, du);
  MatrixXd q_cur = cov_u_perp_c;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const MatrixXd& x = blocks[i];
    const MatrixXd& r = targets[i];
    if (r.rows() != x.cols() || r.cols() != du)
      throw Error(ErrorCode::DimensionMismatch, "target shape must be dim(block) x dim(u)");
    MatrixXd cov_x = x.transpose() * x / static_cast<double>(n - 1);
    MatrixXd q_root = sym_sqrt(q_cur);
    u += x * (sym_inv_sqrt(cov_x) * r * q_root);
    q_cur = q_cur - q_root * r.transpose() * r * q_root;
    q_cur = 0.5 * (q_cur + q_cur.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(q_cur, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues()(0) > 1e-12 * cov_u_perp_c.norm()))
      throw Error(ErrorCode::InfeasibleTarget, "remaining confounder covariance is not positive definite");
  }

  Eigen::HouseholderQR<MatrixXd> qr(span);
  MatrixXd basis = qr.householderQ() * MatrixXd::Identity(n, span.cols() + du);
  MatrixXd z = basis.rightCols(du);
  u += std::sqrt(static_cast<double>(n - 1)) * z * sym_sqrt(q_cur);
  return u;
}

VectorXd construct_confounder(const MediationData& data, const ConfounderTarget& target) {
  const Eigen::Index n = data.n(), q = data.q();
  if (n < data.p() + q + 4) throw Error(ErrorCode::InsufficientSamples, "need n >= p + q + 4");
  if (target.r_m.size() != q) throw Error(ErrorCode::DimensionMismatch, "r_m needs one entry per mediator");
  if (std::abs(target.r_y) >= 1.0 || std::abs(target.r_a) >= 1.0 || target.r_m.norm() >= 1.0)
    throw Error(ErrorCode::BoundaryR, "targets must lie in the open unit ball");
  if (!(target.var_u_perp_c > 0.0)) throw Error(ErrorCode::InvalidArgument, "var(u|c) must be positive");

  MatrixXd ac = hcat({data.a, data.c});
  MatrixXd amc = hcat({data.a, data.m, data.c});
  std::vector<MatrixXd> blocks = {residualize(data.a, data.c), residualize(data.m, ac), residualize(data.y, amc)};
  std::vector<MatrixXd> targets = {MatrixXd::Constant(1, 1, target.r_a), MatrixXd(target.r_m),
                                   MatrixXd::Constant(1, 1, target.r_y)};
  MatrixXd span = hcat({data.c, data.a, data.m, data.y});
  return construct_from_blocks(blocks, targets, span, MatrixXd::Constant(1, 1, target.var_u_perp_c)).col(0);
}

MatrixXd s4_noise_covariance(int dim_m) {
  MatrixXd s(dim_m, dim_m);
  for (int i = 0; i < dim_m; ++i)
    for (int j = 0; j < dim_m; ++j) s(i, j) = std::pow(0.5, std::abs(i - j));
  return s;
}

double s4_population_r2_a_m(const VectorXd& alpha1, const MatrixXd& sigma) {
  const double s = alpha1.dot(sigma.llt().solve(alpha1));
  return s / (1.0 + s);
}

double s4_population_r2_y_m(const VectorXd& alpha2, const MatrixXd& sigma) {
  const double s = alpha2.dot(sigma * alpha2);
  return s / (s + 1.0);
}

namespace {

VectorXd s4_direction1(int q) {
  VectorXd v(q);
  for (int i = 0; i < q; ++i) v(i) = q == 1 ? 1.0 : static_cast<double>(i) / (q - 1);
  return v;
}

VectorXd s4_direction2(int q) {
  VectorXd v(q);
  for (int i = 0; i < q; ++i) v(i) = q == 1 ? 1.0 : 1.0 - 1.5 * static_cast<double>(i) / (q - 1);
  return v;
}

template <typename F>
double bisect_scale(F r2_of, double target) {
  if (!(target > 0.0 && target < 1.0)) throw Error(ErrorCode::RootFindFailed, "R^2 target must be in (0, 1)");
  double lo = 0.0, hi = 1.0;
  for (int k = 0; r2_of(hi) < target; ++k) {
    if (k > 200) throw Error(ErrorCode::RootFindFailed, "could not bracket the R^2 target");
    lo = hi;
    hi *= 2.0;
  }
  for (int k = 0; k < 200 && hi - lo > 1e-14 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    (r2_of(mid) < target ? lo : hi) = mid;
  }
  const double lam = 0.5 * (lo + hi);
  if (std::abs(r2_of(lam) - target) > 1e-6) throw Error(ErrorCode::RootFindFailed, "bisection did not converge");
  return lam;
}

}  // namespace

S4Coefficients s4_coefficients(const S4Design& design) {
  if (design.dim_m < 1) throw Error(ErrorCode::InvalidArgument, "dim_m must be positive");
  S4Coefficients co;
  co.sigma = s4_noise_covariance(design.dim_m);
  const VectorXd v1 = s4_direction1(design.dim_m);
  const VectorXd v2 = s4_direction2(design.dim_m);
  co.lambda1 = bisect_scale([&](double l) { return s4_population_r2_a_m(l * v1, co.sigma); }, design.r2_a_m);
  co.lambda2 = bisect_scale([&](double l) { return s4_population_r2_y_m(l * v2, co.sigma); }, design.r2_y_m);
  co.alpha1 = co.lambda1 * v1;
  co.alpha2 = co.lambda2 * v2;
  return co;
}

MediationData simulate_s4(const S4Design& design) {
  const S4Coefficients co = s4_coefficients(design);
  const int q = design.dim_m;
  const Eigen::Index n = design.n;
  std::mt19937_64 rng(design.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const MatrixXd chol = co.sigma.llt().matrixL();

  VectorXd a(n), y(n);
  MatrixXd m(n, q);
  VectorXd z(q);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i) = normal(rng);
    for (int j = 0; j < q; ++j) z(j) = normal(rng);
    m.row(i) = (co.alpha1 * a(i) + chol * z).transpose();
    y(i) = a(i) + m.row(i).dot(co.alpha2) + normal(rng);
  }
  return make_mediation_data(y, a, m, MatrixXd(n, 0));
}

}  // namespace medsens
