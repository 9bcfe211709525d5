#pragma once

#include <utility>
#include <vector>

#include "medsens/inference.hpp"
#include "medsens/mediation.hpp"
#include "medsens/optimize.hpp"

namespace medsens {

enum class ConfounderMode { ScalarU, VectorU };
const char* to_string(ConfounderMode m);

// The adjusted estimate is linear in a feature vector f(phi): est_b(phi) = g_b . f(phi) on every
// resample b. `point` is g on the full sample and `cov` the covariance of g_b across resamples, so
// the bootstrap SE at phi is sqrt(f' cov f).
struct LinearizedEffect {
  EffectKind kind = EffectKind::Direct;
  Eigen::Index q = 0;
  VectorXd point;
  MatrixXd cov;
  double orientation = 1.0;  // -1 when the observed estimate is negative

  double estimate(const VectorXd& features) const { return point.dot(features); }
  double std_err(const VectorXd& features) const;
  // t statistic of the effect oriented so that the observed estimate is non-negative.
  double oriented_t(const VectorXd& features) const;
  double observed_estimate() const { return point(0); }
  double observed_t() const;
};

// Direct: theta1 = theta1_obs + t1 * phi1 + t2' * phi2.
struct PhiDirect {
  double phi1 = 0.0;
  VectorXd phi2;
};
// Indirect: beta1 = beta1_obs + T_beta phi_beta, theta3 = theta3_obs + T_theta phi_theta.
struct PhiIndirect {
  VectorXd phi_beta;
  VectorXd phi_theta;
};

PhiDirect phi_direct_from_natural(const NaturalSensitivity& s);
PhiIndirect phi_indirect_from_natural(const NaturalSensitivity& s);
VectorXd direct_features(const PhiDirect& phi);
VectorXd indirect_features(const PhiIndirect& phi);

// Per-sample coefficient vector g for the linear forms above.
VectorXd direct_coefficients(const MediationMoments& mm);
VectorXd indirect_coefficients(const MediationMoments& mm);

LinearizedEffect linearize(const MediationMoments& mm, const BootstrapPlan& plan, EffectKind kind);

double adjusted_estimate(const LinearizedEffect& lin, const NaturalSensitivity& s);
double adjusted_t(const LinearizedEffect& lin, const NaturalSensitivity& s);  // not oriented

// Upper bounds on the squared strengths of the three channels.
struct RhoBudget {
  double rho_y = 0.0;
  double rho_m = 0.0;
  double rho_a = 0.0;
  static RhoBudget common(double rho) { return {rho, rho, rho}; }
};

struct SearchOptions {
  int budget = 4000;
  bool randomized = false;  // exposure channel pinned to zero
  ConfounderMode mode = ConfounderMode::ScalarU;
};

// Box over which the optimizer searches, and the map from a box point to features.
struct PhiSearchSpace {
  VectorXd lower, upper;
  std::function<VectorXd(const VectorXd&)> features;
};
PhiSearchSpace phi_search_space(EffectKind kind, Eigen::Index q, const RhoBudget& rho, const SearchOptions& opts);

struct MinTResult {
  double min_t = 0.0;
  VectorXd features;  // features at the minimizer
};

MinTResult min_t(const LinearizedEffect& lin, const RhoBudget& rho, const SearchOptions& opts);
MinTResult min_estimate(const LinearizedEffect& lin, const RhoBudget& rho, const SearchOptions& opts);

double min_t_direct(const MediationMoments& mm, const BootstrapPlan& plan, double rho, ConfounderMode mode,
                    const SearchOptions& opts = {});
double min_t_indirect(const MediationMoments& mm, const BootstrapPlan& plan, double rho, ConfounderMode mode,
                      const SearchOptions& opts = {});

std::vector<double> default_rho_grid();

struct RVOptions {
  SearchOptions search;
  double z = 1.96;
  unsigned threads = 0;
  bool early_stop = false;  // stop scanning once the estimate threshold is reached
};

struct RVReport {
  double rv_estimate = 1.0;
  double rv_ci = 1.0;
  std::vector<std::pair<double, double>> curve;  // (rho, min oriented t), non-increasing
  ConfounderMode mode = ConfounderMode::ScalarU;
  EffectKind effect_kind = EffectKind::Direct;
  bool sign_flipped = false;
  double observed_t = 0.0;  // oriented
};

// Smallest grid rho whose min t reaches the threshold; 0 when the observed t already does, 1 when none does.
double rv_from_curve(const std::vector<std::pair<double, double>>& curve, double observed_t, double threshold);

RVReport robustness_value(const LinearizedEffect& lin, const std::vector<double>& rho_grid, const RVOptions& opts);
RVReport robustness_value(const MediationMoments& mm, const BootstrapPlan& plan, EffectKind kind,
                          const std::vector<double>& rho_grid, const RVOptions& opts);

}  // namespace medsens
