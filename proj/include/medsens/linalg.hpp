#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace medsens {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DataMatrix {
  MatrixXd values;
  std::vector<std::string> column_labels;

  DataMatrix() = default;
  DataMatrix(MatrixXd v, std::vector<std::string> labels = {});
  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

struct LsFit {
  MatrixXd coefficients;  // d x k
  MatrixXd residuals;     // n x k
  MatrixXd fitted;        // n x k
};

inline constexpr double kRankTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;

// Least squares through Householder QR; throws RankDeficient when the smallest
// singular value of the design falls below kRankTol times the largest.
LsFit ols_fit(const MatrixXd& response, const MatrixXd& design);
LsFit ols_fit(const DataMatrix& response, const DataMatrix& design);

MatrixXd residualize(const MatrixXd& target, const MatrixXd& controls);
DataMatrix residualize(const DataMatrix& target, const DataMatrix& controls);

// Sample covariance with divisor n-1 (columns are centered first).
MatrixXd sample_cov(const MatrixXd& x);
MatrixXd sample_cov(const MatrixXd& x, const MatrixXd& y);

MatrixXd sym_sqrt(const MatrixXd& s);
// Requires a positive definite input; throws SingularCovariance otherwise.
MatrixXd sym_inv_sqrt(const MatrixXd& s);

double spectral_norm(const MatrixXd& m);

// Throws SingularCovariance unless s is symmetric positive definite relative to kRankTol.
void require_positive_definite(const MatrixXd& s, const char* what);

// cov(y|z)^{-1/2} cov(y|z, x|z) cov(x|z)^{-1/2}, with |z denoting residuals on z.
// An empty z means "intercept only".
MatrixXd r_matrix(const MatrixXd& y, const MatrixXd& x, const MatrixXd& z);
// Same measure from a joint covariance matrix of the residualized blocks.
MatrixXd r_from_cov(const MatrixXd& cov_yy, const MatrixXd& cov_yx, const MatrixXd& cov_xx);

double partial_r2(const VectorXd& y, const MatrixXd& x, const MatrixXd& z);

MatrixXd with_intercept(const MatrixXd& c);
MatrixXd hcat(std::initializer_list<MatrixXd> blocks);

}  // namespace medsens
