#pragma once

#include <cmath>
#include <random>

#include "medsens/linalg.hpp"
#include "medsens/mediation.hpp"
#include "medsens/oracle.hpp"

namespace testkit {

using medsens::MatrixXd;
using medsens::VectorXd;

inline MatrixXd normal_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> nd(0.0, 1.0);
  MatrixXd x(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) x(i, j) = nd(rng);
  return x;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Linear mediation data with k non-intercept covariates and q mediators.
inline medsens::MediationData random_data(std::mt19937_64& rng, Eigen::Index n, Eigen::Index k, Eigen::Index q) {
  MatrixXd c = normal_matrix(rng, n, k);
  VectorXd a = normal_matrix(rng, n, 1).col(0);
  if (k > 0) a += c * normal_matrix(rng, k, 1).col(0) * 0.5;
  MatrixXd m = a * normal_matrix(rng, 1, q) * 0.6 + normal_matrix(rng, n, q);
  if (k > 0) m += c * normal_matrix(rng, k, q) * 0.4;
  VectorXd y = 0.7 * a + m * normal_matrix(rng, q, 1).col(0) * 0.5 + normal_matrix(rng, n, 1).col(0);
  if (k > 0) y += c * normal_matrix(rng, k, 1).col(0) * 0.3;
  return medsens::make_mediation_data(y, a, m, c);
}

inline VectorXd random_in_ball(std::mt19937_64& rng, Eigen::Index q, double radius) {
  VectorXd v = normal_matrix(rng, q, 1).col(0);
  v.normalize();
  return v * radius * std::pow(uniform(rng, 0.0, 1.0), 1.0 / static_cast<double>(q));
}

inline medsens::NaturalSensitivity random_natural(std::mt19937_64& rng, Eigen::Index q, double radius = 0.9) {
  medsens::NaturalSensitivity s;
  s.r_y = uniform(rng, -radius, radius);
  s.r_m = random_in_ball(rng, q, radius);
  s.r_a = uniform(rng, -radius, radius);
  return s;
}

struct LongFit {
  VectorXd coef;
  VectorXd se;  // classical
};

inline LongFit long_fit(const VectorXd& y, const MatrixXd& x) {
  auto fit = medsens::ols_fit(y, x);
  LongFit out;
  out.coef = fit.coefficients.col(0);
  const double sigma2 = fit.residuals.squaredNorm() / static_cast<double>(x.rows() - x.cols());
  MatrixXd xtx_inv = (x.transpose() * x).inverse();
  out.se = (sigma2 * xtx_inv.diagonal()).cwiseSqrt();
  return out;
}

// Coefficients of the regressions that include the confounder column u.
struct LongRegressions {
  double theta1 = 0.0;
  VectorXd theta3;
  VectorXd beta1;
  double gamma1 = 0.0;
  double se_theta1 = 0.0, se_theta3 = 0.0, se_beta1 = 0.0;
};

inline LongRegressions long_regressions(const medsens::MediationData& d, const VectorXd& u) {
  const Eigen::Index q = d.q();
  LongRegressions r;
  LongFit fy = long_fit(d.y, medsens::hcat({d.a, d.m, d.c, u}));
  r.theta1 = fy.coef(0);
  r.theta3 = fy.coef.segment(1, q);
  r.se_theta1 = fy.se(0);
  r.se_theta3 = fy.se(1);
  r.beta1.resize(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    LongFit fm = long_fit(d.m.col(j), medsens::hcat({d.a, d.c, u}));
    r.beta1(j) = fm.coef(0);
    if (j == 0) r.se_beta1 = fm.se(0);
  }
  r.gamma1 = long_fit(d.y, medsens::hcat({d.a, d.c, u})).coef(0);
  return r;
}

inline double rel_err(double x, double ref) { return std::abs(x - ref) / std::max(std::abs(ref), 1e-3); }

inline double max_rel_err(const VectorXd& x, const VectorXd& ref) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) e = std::max(e, rel_err(x(i), ref(i)));
  return e;
}

// A random dataset, natural targets, the confounder achieving them and the long regressions with it.
struct OracleInstance {
  medsens::MediationData data;
  medsens::NaturalSensitivity natural;
  VectorXd u;
  LongRegressions truth;
};

inline OracleInstance oracle_instance(std::mt19937_64& rng, Eigen::Index n, Eigen::Index k, Eigen::Index q,
                                      bool randomized = false) {
  OracleInstance inst{random_data(rng, n, k, q), random_natural(rng, q), VectorXd(), LongRegressions()};
  if (randomized) inst.natural.r_a = 0.0;
  medsens::ConfounderTarget target{inst.natural.r_y, inst.natural.r_m, inst.natural.r_a, 1.0};
  inst.u = medsens::construct_confounder(inst.data, target);
  inst.truth = long_regressions(inst.data, inst.u);
  return inst;
}

}  // namespace testkit
