#include "medsens/mediation.hpp"

#include <cmath>

#include "medsens/error.hpp"

namespace medsens {

namespace {

constexpr double kBoundary = 1.0 - 1e-12;

void check_open_ball(double norm, const char* what) {
  if (!std::isfinite(norm) || norm >= kBoundary)
    throw Error(ErrorCode::BoundaryR, std::string(what) + " must lie strictly inside the unit ball");
}

void check_natural(const MediationMoments& mm, const NaturalSensitivity& s) {
  if (s.r_m.size() != mm.q)
    throw Error(ErrorCode::DimensionMismatch, "R_{m~u|a,c} must have one entry per mediator");
  check_open_ball(std::abs(s.r_y), "R_{y~u|a,m,c}");
  check_open_ball(s.r_m.norm(), "R_{m~u|a,c}");
  check_open_ball(std::abs(s.r_a), "R_{a~u|c}");
}

double observed_r_norm2(const MediationMoments& mm) {
  const double r2 = mm.r_m_a_c.squaredNorm();
  if (!(r2 < kBoundary * kBoundary))
    throw Error(ErrorCode::DegenerateObservedR, "observed R_{m~a|c} is on the unit sphere");
  return r2;
}

}  // namespace

MediationData make_mediation_data(const VectorXd& y, const VectorXd& a, const MatrixXd& m,
                                  const MatrixXd& covariates) {
  const Eigen::Index n = y.size();
  if (a.size() != n || m.rows() != n || (covariates.cols() > 0 && covariates.rows() != n))
    throw Error(ErrorCode::DimensionMismatch, "outcome, exposure, mediators and covariates need equal rows");
  if (m.cols() < 1) throw Error(ErrorCode::InvalidArgument, "at least one mediator is required");
  MediationData d;
  d.y = y;
  d.a = a;
  d.m = m;
  d.c = with_intercept(covariates.cols() > 0 ? covariates : MatrixXd(n, 0));
  if (!d.y.allFinite() || !d.a.allFinite() || !d.m.allFinite() || !d.c.allFinite())
    throw Error(ErrorCode::InvalidArgument, "data contain non-finite values");
  if (n < d.p() + d.q() + 4)
    throw Error(ErrorCode::InsufficientSamples, "need n >= p + q + 4 (p counts the intercept)");
  for (Eigen::Index j = 0; j < d.q(); ++j) d.mediator_labels.push_back("m" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j < covariates.cols(); ++j) d.covariate_labels.push_back("c" + std::to_string(j + 1));
  return d;
}

NaturalSensitivity NaturalSensitivity::zero(Eigen::Index q) {
  NaturalSensitivity s;
  s.r_m = VectorXd::Zero(q);
  return s;
}

MediationMoments moments_from_residual_cov(const MatrixXd& sigma, Eigen::Index n, Eigen::Index p) {
  const Eigen::Index q = sigma.rows() - 2;
  if (q < 1 || sigma.cols() != sigma.rows())
    throw Error(ErrorCode::DimensionMismatch, "residual covariance must be (q+2) x (q+2)");
  require_positive_definite(sigma, "joint residual covariance of (y, m, a)");

  const double s_yy = sigma(0, 0);
  const VectorXd s_my = sigma.block(1, 0, q, 1);
  const double s_ay = sigma(q + 1, 0);
  const MatrixXd s_mm = sigma.block(1, 1, q, q);
  const VectorXd s_ma = sigma.block(1, q + 1, q, 1);
  const double s_aa = sigma(q + 1, q + 1);

  MediationMoments mm;
  mm.n = n;
  mm.p = p;
  mm.q = q;
  mm.var_a_res_c = s_aa;
  mm.cov_m_res_c = s_mm;
  mm.beta1_obs = s_ma / s_aa;
  mm.cov_m_res_ac = s_mm - s_ma * s_ma.transpose() / s_aa;
  mm.cov_m_res_ac = 0.5 * (mm.cov_m_res_ac + mm.cov_m_res_ac.transpose());

  // Outcome on (a, m).
  MatrixXd s_xx(q + 1, q + 1);
  s_xx(0, 0) = s_aa;
  s_xx.block(0, 1, 1, q) = s_ma.transpose();
  s_xx.block(1, 0, q, 1) = s_ma;
  s_xx.block(1, 1, q, q) = s_mm;
  VectorXd s_xy(q + 1);
  s_xy(0) = s_ay;
  s_xy.tail(q) = s_my;
  Eigen::LLT<MatrixXd> llt_xx(s_xx);
  VectorXd coef = llt_xx.solve(s_xy);
  mm.theta1_obs = coef(0);
  mm.theta3_obs = coef.tail(q);
  mm.var_y_res_amc = s_yy - s_xy.dot(coef);

  Eigen::LLT<MatrixXd> llt_mm(s_mm);
  mm.var_a_res_mc = s_aa - s_ma.dot(llt_mm.solve(s_ma));
  mm.gamma1_obs = s_ay / s_aa;
  mm.var_y_res_ac = s_yy - s_ay * s_ay / s_aa;

  mm.sqrt_cov_m_ac = sym_sqrt(mm.cov_m_res_ac);
  mm.inv_sqrt_cov_m_ac = sym_inv_sqrt(mm.cov_m_res_ac);
  const MatrixXd inv_sqrt_m_c = sym_inv_sqrt(s_mm);
  mm.m_shrink = inv_sqrt_m_c * mm.sqrt_cov_m_ac;
  mm.r_m_a_c = inv_sqrt_m_c * s_ma / std::sqrt(s_aa);
  const VectorXd cov_m_y_ac = s_my - s_ma * s_ay / s_aa;
  mm.r_y_m_ac = mm.inv_sqrt_cov_m_ac * cov_m_y_ac / std::sqrt(mm.var_y_res_ac);
  return mm;
}

MediationMoments fit_observed(const MediationData& data) {
  const Eigen::Index n = data.n(), q = data.q();
  if (data.a.size() != n || data.m.rows() != n || data.c.rows() != n)
    throw Error(ErrorCode::DimensionMismatch, "mediation data blocks have unequal rows");
  MatrixXd block(n, q + 2);
  block.col(0) = data.y;
  block.middleCols(1, q) = data.m;
  block.col(q + 1) = data.a;
  MatrixXd res = residualize(block, data.c);
  MatrixXd sigma = res.transpose() * res / static_cast<double>(n - 1);
  return moments_from_residual_cov(sigma, n, data.p());
}

double odds(double r) { return r / std::sqrt(1.0 - r * r); }

VectorXd r_muc_from_natural(const MediationMoments& mm, const NaturalSensitivity& s) {
  check_natural(mm, s);
  return std::sqrt(1.0 - s.r_a * s.r_a) * (mm.m_shrink * s.r_m) + s.r_a * mm.r_m_a_c;
}

namespace {

// Odds of R_{a~u|m,c}.
double aumc_odds(const MediationMoments& mm, const NaturalSensitivity& s) {
  const double big_r2 = observed_r_norm2(mm);
  const double root_r = std::sqrt(1.0 - big_r2);
  const double root_m = std::sqrt(1.0 - s.r_m.squaredNorm());
  const double root_a = std::sqrt(1.0 - s.r_a * s.r_a);
  const double cross = mm.r_m_a_c.dot(mm.m_shrink * s.r_m);
  return s.r_a * root_r / (root_a * root_m) - cross / (root_r * root_m);
}

}  // namespace

double r_aumc_from_natural(const MediationMoments& mm, const NaturalSensitivity& s) {
  check_natural(mm, s);
  const double o = aumc_odds(mm, s);
  return o / std::sqrt(1.0 + o * o);
}

double r_aumc_two_step(const MediationMoments& mm, const NaturalSensitivity& s) {
  const double big_r2 = observed_r_norm2(mm);
  const VectorXd r_muc = r_muc_from_natural(mm, s);
  check_open_ball(r_muc.norm(), "R_{m~u|c}");
  return (s.r_a - mm.r_m_a_c.dot(r_muc)) / (std::sqrt(1.0 - big_r2) * std::sqrt(1.0 - r_muc.squaredNorm()));
}

double r_yuac_from_natural(const MediationMoments& mm, const NaturalSensitivity& s) {
  check_natural(mm, s);
  const double ry2 = mm.r_y_m_ac.squaredNorm();
  return std::sqrt(1.0 - s.r_m.squaredNorm()) * std::sqrt(1.0 - ry2) * s.r_y + mm.r_y_m_ac.dot(s.r_m);
}

double direct_adjusted(const MediationMoments& mm, const NaturalSensitivity& s) {
  check_natural(mm, s);
  const double o = aumc_odds(mm, s);
  return mm.theta1_obs - s.r_y * o * std::sqrt(mm.var_y_res_amc / mm.var_a_res_mc);
}

VectorXd beta1_adjusted(const MediationMoments& mm, const NaturalSensitivity& s) {
  check_natural(mm, s);
  return mm.beta1_obs - odds(s.r_a) * (mm.sqrt_cov_m_ac * s.r_m) / std::sqrt(mm.var_a_res_c);
}

VectorXd theta3_adjusted(const MediationMoments& mm, const NaturalSensitivity& s) {
  check_natural(mm, s);
  const double scale = s.r_y * std::sqrt(mm.var_y_res_amc) / std::sqrt(1.0 - s.r_m.squaredNorm());
  return mm.theta3_obs - scale * (mm.inv_sqrt_cov_m_ac * s.r_m);
}

double gamma1_adjusted(const MediationMoments& mm, const NaturalSensitivity& s) {
  const double r_yuac = r_yuac_from_natural(mm, s);
  return mm.gamma1_obs - r_yuac * odds(s.r_a) * std::sqrt(mm.var_y_res_ac / mm.var_a_res_c);
}

double indirect_adjusted_product(const MediationMoments& mm, const NaturalSensitivity& s) {
  return theta3_adjusted(mm, s).dot(beta1_adjusted(mm, s));
}

double indirect_adjusted_difference(const MediationMoments& mm, const NaturalSensitivity& s) {
  return gamma1_adjusted(mm, s) - direct_adjusted(mm, s);
}

double direct_randomized(const MediationMoments& mm, double r_y, const VectorXd& r_m) {
  NaturalSensitivity s{r_y, r_m, 0.0};
  check_natural(mm, s);
  const double big_r2 = observed_r_norm2(mm);
  const double cross = mm.r_m_a_c.dot(mm.m_shrink * r_m);
  return mm.theta1_obs + r_y * std::sqrt(mm.var_y_res_amc / mm.var_a_res_mc) * cross /
                             (std::sqrt(1.0 - big_r2) * std::sqrt(1.0 - r_m.squaredNorm()));
}

double indirect_randomized(const MediationMoments& mm, double r_y, const VectorXd& r_m) {
  NaturalSensitivity s{r_y, r_m, 0.0};
  return theta3_adjusted(mm, s).dot(mm.beta1_obs);
}

const char* to_string(EffectKind k) { return k == EffectKind::Direct ? "direct" : "indirect"; }

const char* to_string(EffectMethod m) {
  switch (m) {
    case EffectMethod::Plugin: return "plugin";
    case EffectMethod::Product: return "product";
    case EffectMethod::Difference: return "difference";
    case EffectMethod::SampleClassical: return "sample-classical";
  }
  return "unknown";
}

EffectReport make_report(double estimate, double std_err, EffectKind kind, EffectMethod method, double z) {
  EffectReport r;
  r.estimate = estimate;
  r.std_err = std_err;
  r.t_stat = std_err > 0.0 ? estimate / std_err : (estimate == 0.0 ? 0.0 : std::copysign(INFINITY, estimate));
  r.ci_lower = estimate - z * std_err;
  r.ci_upper = estimate + z * std_err;
  r.effect_kind = kind;
  r.method = method;
  return r;
}

}  // namespace medsens
