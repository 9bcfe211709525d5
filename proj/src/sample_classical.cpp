#include <array>
#include <cmath>

#include "medsens/error.hpp"
#include "medsens/mediation.hpp"

namespace medsens {

int sgn(double x) { return (x > 0.0) - (x < 0.0); }

namespace {

void check_r2(const R2Sensitivity& r2) {
  for (double v : {r2.r2_y, r2.r2_m, r2.r2_a})
    if (!(v >= 0.0 && v < 1.0)) throw Error(ErrorCode::BoundaryR, "R^2 parameters must lie in [0, 1)");
}

void check_scalar_mediator(const MediationMoments& mm) {
  if (mm.q != 1) throw Error(ErrorCode::InvalidArgument, "the classical-SE variant needs a single mediator");
  if (mm.n < mm.p + mm.q + 4) throw Error(ErrorCode::InsufficientSamples, "need n >= p + q + 4");
}

void check_sign(int s) {
  if (s != -1 && s != 0 && s != 1) throw Error(ErrorCode::InvalidArgument, "signs must be -1, 0 or 1");
}

// Index of the entry with the smallest t after orienting by the observed sign.
template <std::size_t N>
std::size_t worst_index(const std::array<EffectReport, N>& reports, double observed) {
  const double orient = observed < 0.0 ? -1.0 : 1.0;
  std::size_t best = 0;
  for (std::size_t i = 1; i < N; ++i)
    if (orient * reports[i].t_stat < orient * reports[best].t_stat) best = i;
  return best;
}

}  // namespace

double r2_aumc_from_natural(double r2_m_a_c, const R2Sensitivity& r2, int s2) {
  check_r2(r2);
  const double v1 = std::sqrt(r2.r2_a * r2_m_a_c);
  if (r2.r2_m == 0.0) return 1.0 - (1.0 - r2.r2_a) / (1.0 - v1 * v1);
  const double v2 = std::sqrt(r2.r2_m * (1.0 - r2.r2_a) * (1.0 - r2_m_a_c));
  const double w = s2 * v1 + v2;
  return 1.0 - (1.0 - r2.r2_a) * (1.0 - r2.r2_m) / (1.0 - w * w);
}

ClassicalFit classical_standard_errors(const MediationMoments& mm) {
  const double nm1 = static_cast<double>(mm.n - 1);
  const double df_y = static_cast<double>(mm.n - mm.p - mm.q - 1);
  const double df_m = static_cast<double>(mm.n - mm.p - 1);
  if (df_y <= 0.0) throw Error(ErrorCode::InsufficientSamples, "no residual degrees of freedom");
  const double sigma2_y = nm1 * mm.var_y_res_amc / df_y;
  ClassicalFit f;
  f.se_theta1 = std::sqrt(sigma2_y / (nm1 * mm.var_a_res_mc));
  if (mm.q == 1) {
    const double var_m_ac = mm.cov_m_res_ac(0, 0);
    f.se_theta3 = std::sqrt(sigma2_y / (nm1 * var_m_ac));
    f.se_beta1 = std::sqrt((nm1 * var_m_ac / df_m) / (nm1 * mm.var_a_res_c));
  }
  return f;
}

EffectReport direct_sample_classical(const MediationMoments& mm, const R2Sensitivity& r2,
                                     std::optional<DirectSigns> signs) {
  check_scalar_mediator(mm);
  check_r2(r2);
  const double n = static_cast<double>(mm.n), p = static_cast<double>(mm.p);
  const double r2_m_a_c = mm.r_m_a_c.squaredNorm();
  const ClassicalFit cf = classical_standard_errors(mm);

  auto evaluate = [&](int s1, int s2) {
    check_sign(s1);
    check_sign(s2);
    const double r2_aumc = r2_aumc_from_natural(r2_m_a_c, r2, s2);
    if (!(r2_aumc < 1.0)) throw Error(ErrorCode::BoundaryR, "implied R^2_{A~U|M,C} reaches 1");
    const double shift = std::sqrt(r2.r2_y * r2_aumc / (1.0 - r2_aumc)) *
                         std::sqrt(mm.var_y_res_amc / mm.var_a_res_mc);
    const double est = mm.theta1_obs + s1 * shift;
    const double se = cf.se_theta1 * std::sqrt((n - p - 2.0) / (n - p - 3.0) * (1.0 - r2.r2_y) / (1.0 - r2_aumc));
    EffectReport r = make_report(est, se, EffectKind::Direct, EffectMethod::SampleClassical);
    r.signs = {s1, s2};
    return r;
  };

  if (signs) return evaluate(signs->s1, signs->s2);
  std::array<EffectReport, 4> all = {evaluate(1, 1), evaluate(1, -1), evaluate(-1, 1), evaluate(-1, -1)};
  EffectReport out = all[worst_index(all, mm.theta1_obs)];
  out.worst_case_signs = true;
  return out;
}

EffectReport indirect_sample_classical(const MediationMoments& mm, const R2Sensitivity& r2,
                                       std::optional<IndirectSigns> signs) {
  check_scalar_mediator(mm);
  check_r2(r2);
  const double n = static_cast<double>(mm.n), p = static_cast<double>(mm.p);
  const double var_m_ac = mm.cov_m_res_ac(0, 0);
  const ClassicalFit cf = classical_standard_errors(mm);
  const double beta_shift = std::sqrt(r2.r2_m * r2.r2_a / (1.0 - r2.r2_a)) * std::sqrt(var_m_ac / mm.var_a_res_c);
  const double theta_shift = std::sqrt(r2.r2_y * r2.r2_m / (1.0 - r2.r2_m)) * std::sqrt(mm.var_y_res_amc / var_m_ac);
  const double se_beta = cf.se_beta1 * std::sqrt((n - p - 1.0) / (n - p - 2.0) * (1.0 - r2.r2_m) / (1.0 - r2.r2_a));
  const double se_theta = cf.se_theta3 * std::sqrt((n - p - 2.0) / (n - p - 3.0) * (1.0 - r2.r2_y) / (1.0 - r2.r2_m));

  auto evaluate = [&](int s3, int s4) {
    check_sign(s3);
    check_sign(s4);
    const double beta = mm.beta1_obs(0) + s3 * beta_shift;
    const double theta = mm.theta3_obs(0) + s4 * theta_shift;
    const double se = std::sqrt(beta * beta * se_theta * se_theta + theta * theta * se_beta * se_beta);
    EffectReport r = make_report(beta * theta, se, EffectKind::Indirect, EffectMethod::SampleClassical);
    r.signs = {s3, s4};
    return r;
  };

  if (signs) return evaluate(signs->s3, signs->s4);
  std::array<EffectReport, 4> all = {evaluate(1, 1), evaluate(1, -1), evaluate(-1, 1), evaluate(-1, -1)};
  EffectReport out = all[worst_index(all, mm.indirect_obs())];
  out.worst_case_signs = true;
  return out;
}

EffectReport direct_sample_classical(const MediationData& data, const R2Sensitivity& r2,
                                     std::optional<DirectSigns> signs) {
  return direct_sample_classical(fit_observed(data), r2, signs);
}

EffectReport indirect_sample_classical(const MediationData& data, const R2Sensitivity& r2,
                                       std::optional<IndirectSigns> signs) {
  return indirect_sample_classical(fit_observed(data), r2, signs);
}

}  // namespace medsens
