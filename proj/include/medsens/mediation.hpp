#pragma once

#include <optional>
#include <string>
#include <vector>

#include "medsens/linalg.hpp"

namespace medsens {

struct MediationData {
  VectorXd y;
  VectorXd a;
  MatrixXd m;  // n x q
  MatrixXd c;  // n x p, first column is the intercept
  std::string outcome_label = "y";
  std::string exposure_label = "a";
  std::vector<std::string> mediator_labels;
  std::vector<std::string> covariate_labels;  // excludes the intercept

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return c.cols(); }
  Eigen::Index q() const { return m.cols(); }
};

// Prepends the intercept to covariates (which may have zero columns) and validates shapes.
MediationData make_mediation_data(const VectorXd& y, const VectorXd& a, const MatrixXd& m,
                                  const MatrixXd& covariates);

struct NaturalSensitivity {
  double r_y = 0.0;  // R_{y~u|a,m,c}
  VectorXd r_m;      // R_{m~u|a,c}
  double r_a = 0.0;  // R_{a~u|c}

  static NaturalSensitivity zero(Eigen::Index q);
};

struct MediationMoments {
  Eigen::Index n = 0, p = 0, q = 0;
  VectorXd beta1_obs;
  double theta1_obs = 0.0;
  VectorXd theta3_obs;
  double gamma1_obs = 0.0;
  double var_y_res_amc = 0.0;
  double var_a_res_mc = 0.0;
  double var_a_res_c = 0.0;
  double var_y_res_ac = 0.0;
  MatrixXd cov_m_res_ac;
  MatrixXd cov_m_res_c;
  VectorXd r_m_a_c;   // R_{m~a|c}
  VectorXd r_y_m_ac;  // R_{y~m|a,c}

  // Cached matrix functions of the residual covariances.
  MatrixXd sqrt_cov_m_ac;
  MatrixXd inv_sqrt_cov_m_ac;
  MatrixXd m_shrink;  // cov(m|c)^{-1/2} cov(m|a,c)^{1/2}

  double indirect_obs() const { return theta3_obs.dot(beta1_obs); }
};

MediationMoments fit_observed(const MediationData& data);
// Same moments from the residual covariance of (y, m, a) after c.
MediationMoments moments_from_residual_cov(const MatrixXd& sigma, Eigen::Index n, Eigen::Index p);

double odds(double r);

// R_{m~u|c} from the natural parameters.
VectorXd r_muc_from_natural(const MediationMoments& mm, const NaturalSensitivity& s);
// R_{a~u|m,c}, computed through its odds.
double r_aumc_from_natural(const MediationMoments& mm, const NaturalSensitivity& s);
// Same quantity composed in two steps through R_{m~u|c}.
double r_aumc_two_step(const MediationMoments& mm, const NaturalSensitivity& s);
// R_{y~u|a,c} from the natural parameters.
double r_yuac_from_natural(const MediationMoments& mm, const NaturalSensitivity& s);

double direct_adjusted(const MediationMoments& mm, const NaturalSensitivity& s);
VectorXd beta1_adjusted(const MediationMoments& mm, const NaturalSensitivity& s);
VectorXd theta3_adjusted(const MediationMoments& mm, const NaturalSensitivity& s);
double gamma1_adjusted(const MediationMoments& mm, const NaturalSensitivity& s);
double indirect_adjusted_product(const MediationMoments& mm, const NaturalSensitivity& s);
double indirect_adjusted_difference(const MediationMoments& mm, const NaturalSensitivity& s);
double direct_randomized(const MediationMoments& mm, double r_y, const VectorXd& r_m);
double indirect_randomized(const MediationMoments& mm, double r_y, const VectorXd& r_m);

enum class EffectKind { Direct, Indirect };
enum class EffectMethod { Plugin, Product, Difference, SampleClassical };

const char* to_string(EffectKind k);
const char* to_string(EffectMethod m);

struct EffectReport {
  double estimate = 0.0;
  double std_err = 0.0;
  double t_stat = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  EffectKind effect_kind = EffectKind::Direct;
  EffectMethod method = EffectMethod::Plugin;
  bool worst_case_signs = false;
  std::vector<int> signs;
};

EffectReport make_report(double estimate, double std_err, EffectKind kind, EffectMethod method,
                         double z = 1.96);

struct R2Sensitivity {
  double r2_y = 0.0;  // R^2_{Y~U|A,M,C}
  double r2_m = 0.0;  // R^2_{M~U|A,C}
  double r2_a = 0.0;  // R^2_{A~U|C}
};

struct DirectSigns {
  int s1 = 1;  // sign of the shift in the direct effect
  int s2 = 1;  // sign(beta1_obs) * sign(beta1_obs - beta1_unobs)
};

struct IndirectSigns {
  int s3 = 1;  // sign of the shift in beta1
  int s4 = 1;  // sign of the shift in theta3
};

int sgn(double x);

// R^2_{A~U|M,C} from the natural R^2 parameters (scalar mediator only).
double r2_aumc_from_natural(double r2_m_a_c, const R2Sensitivity& r2, int s2);

struct ClassicalFit {
  double se_theta1 = 0.0;
  double se_theta3 = 0.0;
  double se_beta1 = 0.0;
};
ClassicalFit classical_standard_errors(const MediationMoments& mm);

// Classical-SE variants; scalar mediator only. Without signs, the worst case over signs is returned.
EffectReport direct_sample_classical(const MediationData& data, const R2Sensitivity& r2,
                                     std::optional<DirectSigns> signs = std::nullopt);
EffectReport indirect_sample_classical(const MediationData& data, const R2Sensitivity& r2,
                                       std::optional<IndirectSigns> signs = std::nullopt);
EffectReport direct_sample_classical(const MediationMoments& mm, const R2Sensitivity& r2,
                                     std::optional<DirectSigns> signs = std::nullopt);
EffectReport indirect_sample_classical(const MediationMoments& mm, const R2Sensitivity& r2,
                                       std::optional<IndirectSigns> signs = std::nullopt);

}  // namespace medsens
