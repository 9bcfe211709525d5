#pragma once

#include <cstdint>
#include <vector>

#include "medsens/mediation.hpp"

namespace medsens {

struct ConfounderTarget {
  double r_y = 0.0;  // R_{y~u|a,m,c}
  VectorXd r_m;      // R_{m~u|a,c}
  double r_a = 0.0;  // R_{a~u|c}
  double var_u_perp_c = 1.0;
};

// Builds u = sum_i X_i B_i + v from mutually orthogonal residual blocks X_i (each already
// orthogonal to the controls) so that R_{X_i~u|previous blocks} equals targets[i]; v is drawn
// from the orthogonal complement of `span` and carries the leftover covariance.
MatrixXd construct_from_blocks(const std::vector<MatrixXd>& blocks, const std::vector<MatrixXd>& targets,
                               const MatrixXd& span, const MatrixXd& cov_u_perp_c);

// Confounder column achieving the natural R triple exactly on the sample.
VectorXd construct_confounder(const MediationData& data, const ConfounderTarget& target);

struct S4Design {
  int dim_m = 2;
  double r2_a_m = 0.3;  // population R^2_{a~m|c}
  double r2_y_m = 0.3;  // population R^2_{y~m|a,c}
  Eigen::Index n = 500;
  std::uint64_t seed = 1;
};

struct S4Coefficients {
  VectorXd alpha1;  // a -> m
  VectorXd alpha2;  // m -> y
  MatrixXd sigma;   // mediator noise covariance
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

MatrixXd s4_noise_covariance(int dim_m);
double s4_population_r2_a_m(const VectorXd& alpha1, const MatrixXd& sigma);
double s4_population_r2_y_m(const VectorXd& alpha2, const MatrixXd& sigma);
S4Coefficients s4_coefficients(const S4Design& design);
MediationData simulate_s4(const S4Design& design);

struct StudyOptions {
  int replications = 20;
  int bootstrap = 200;
  int budget = 4000;
  std::uint64_t seed = 2024;
  unsigned threads = 0;
};

struct StudyRow {
  S4Design design;
  std::vector<double> rv_scalar;  // indirect-effect RV for the estimate, per replication
  std::vector<double> rv_vector;
  std::vector<double> rv_ci_scalar;
  std::vector<double> rv_ci_vector;
  double mean_scalar = 0.0;
  double mean_vector = 0.0;
  double mean_ci_scalar = 0.0;
  double mean_ci_vector = 0.0;
  double ratio = 0.0;  // mean_vector / mean_scalar
};

std::vector<StudyRow> rv_ratio_study(const std::vector<S4Design>& designs, const StudyOptions& opts);

}  // namespace medsens
