#pragma once

#include "medsens/linalg.hpp"

namespace medsens {

struct ScalarUSensitivity {
  VectorXd r_y_u;  // R_{y~u|a,c}
  VectorXd r_a_u;  // R_{a~u|c}
};

struct VectorUSensitivity {
  MatrixXd r_y_u;         // d_y x d_u, R_{y~u|a,c}
  MatrixXd r_a_u;         // d_a x d_u, R_{a~u|c}
  MatrixXd cov_u_perp_c;  // d_u x d_u; empty means identity
};

struct OvbMoments {
  MatrixXd theta_obs;  // d_y x d_a short-regression coefficient of a
  MatrixXd cov_y_res;  // cov(y | a, c)
  MatrixXd cov_a_res;  // cov(a | c)
};

// Short regression of y on (a, c); c should carry the intercept.
OvbMoments ovb_moments(const MatrixXd& y, const MatrixXd& a, const MatrixXd& c);

MatrixXd adjust_scalar_u(const OvbMoments& m, const ScalarUSensitivity& s);
MatrixXd adjust_vector_u(const OvbMoments& m, const VectorUSensitivity& s);

// cov(u | a, c) from cov(u | c) and R_{a~u|c}.
MatrixXd cov_u_update(const MatrixXd& cov_u, const MatrixXd& r);

}  // namespace medsens
