#include "medsens/linalg.hpp"

#include <cmath>

#include "medsens/error.hpp"

namespace medsens {

DataMatrix::DataMatrix(MatrixXd v, std::vector<std::string> labels)
    : values(std::move(v)), column_labels(std::move(labels)) {
  if (values.rows() < 1 || values.cols() < 1)
    throw Error(ErrorCode::DimensionMismatch, "data matrix must be at least 1x1");
  if (!values.allFinite()) throw Error(ErrorCode::InvalidArgument, "data matrix has non-finite entries");
  if (!column_labels.empty() && static_cast<Eigen::Index>(column_labels.size()) != values.cols())
    throw Error(ErrorCode::DimensionMismatch, "label count differs from column count");
}

LsFit ols_fit(const MatrixXd& response, const MatrixXd& design) {
  if (response.rows() != design.rows())
    throw Error(ErrorCode::DimensionMismatch, "response and design row counts differ");
  const Eigen::Index d = design.cols();
  if (d > design.rows()) throw Error(ErrorCode::RankDeficient, "more columns than rows");

  Eigen::HouseholderQR<MatrixXd> qr(design);
  MatrixXd r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<MatrixXd> svd(r);
  const auto& sv = svd.singularValues();
  if (d > 0 && !(sv(d - 1) > kRankTol * sv(0)))
    throw Error(ErrorCode::RankDeficient, "design is numerically singular");

  LsFit fit;
  MatrixXd qty = qr.householderQ().adjoint() * response;
  fit.coefficients = r.triangularView<Eigen::Upper>().solve(qty.topRows(d));
  fit.fitted = design * fit.coefficients;
  fit.residuals = response - fit.fitted;
  return fit;
}

LsFit ols_fit(const DataMatrix& response, const DataMatrix& design) {
  return ols_fit(response.values, design.values);
}

MatrixXd residualize(const MatrixXd& target, const MatrixXd& controls) {
  if (controls.cols() == 0) return target;
  return ols_fit(target, controls).residuals;
}

DataMatrix residualize(const DataMatrix& target, const DataMatrix& controls) {
  return DataMatrix(residualize(target.values, controls.values), target.column_labels);
}

MatrixXd sample_cov(const MatrixXd& x) { return sample_cov(x, x); }

MatrixXd sample_cov(const MatrixXd& x, const MatrixXd& y) {
  if (x.rows() != y.rows()) throw Error(ErrorCode::DimensionMismatch, "covariance row counts differ");
  if (x.rows() < 2) throw Error(ErrorCode::InsufficientSamples, "covariance needs at least two rows");
  MatrixXd xc = x.rowwise() - x.colwise().mean();
  MatrixXd yc = y.rowwise() - y.colwise().mean();
  return xc.transpose() * yc / static_cast<double>(x.rows() - 1);
}

namespace {

Eigen::SelfAdjointEigenSolver<MatrixXd> symmetric_eigen(const MatrixXd& s) {
  if (s.rows() != s.cols()) throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw Error(ErrorCode::NotSymmetric, "matrix is not symmetric");
  MatrixXd sym = 0.5 * (s + s.transpose());
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(sym);
}

}  // namespace

MatrixXd sym_sqrt(const MatrixXd& s) {
  auto es = symmetric_eigen(s);
  VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -kPsdTol) throw Error(ErrorCode::NegativeEigenvalue, "matrix is not positive semidefinite");
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  const MatrixXd& v = es.eigenvectors();
  MatrixXd out = v * ev.asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

MatrixXd sym_inv_sqrt(const MatrixXd& s) {
  auto es = symmetric_eigen(s);
  const VectorXd& ev = es.eigenvalues();
  if (ev.size() > 0 && !(ev(0) > kRankTol * std::max(ev(ev.size() - 1), 0.0) && ev(0) > 0.0))
    throw Error(ErrorCode::SingularCovariance, "matrix is not positive definite");
  const MatrixXd& v = es.eigenvectors();
  MatrixXd out = v * ev.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

double spectral_norm(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return svd.singularValues()(0);
}

void require_positive_definite(const MatrixXd& s, const char* what) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
  const VectorXd& ev = es.eigenvalues();
  if (ev.size() == 0) return;
  if (!(ev(0) > 0.0 && ev(0) > kRankTol * ev(ev.size() - 1)))
    throw Error(ErrorCode::SingularCovariance, std::string(what) + " is not positive definite");
}

MatrixXd r_from_cov(const MatrixXd& cov_yy, const MatrixXd& cov_yx, const MatrixXd& cov_xx) {
  const Eigen::Index dy = cov_yy.rows(), dx = cov_xx.rows();
  MatrixXd joint(dy + dx, dy + dx);
  joint << cov_yy, cov_yx, cov_yx.transpose(), cov_xx;
  require_positive_definite(joint, "joint residual covariance");
  return sym_inv_sqrt(cov_yy) * cov_yx * sym_inv_sqrt(cov_xx);
}

MatrixXd r_matrix(const MatrixXd& y, const MatrixXd& x, const MatrixXd& z) {
  if (y.rows() != x.rows() || (z.cols() > 0 && z.rows() != y.rows()))
    throw Error(ErrorCode::DimensionMismatch, "r_matrix row counts differ");
  MatrixXd joint(y.rows(), y.cols() + x.cols());
  joint << y, x;
  MatrixXd res = residualize(joint, z);
  MatrixXd cov = sample_cov(res);
  const Eigen::Index dy = y.cols(), dx = x.cols();
  return r_from_cov(cov.topLeftCorner(dy, dy), cov.topRightCorner(dy, dx), cov.bottomRightCorner(dx, dx));
}

double partial_r2(const VectorXd& y, const MatrixXd& x, const MatrixXd& z) {
  MatrixXd zi = z.cols() > 0 ? z : MatrixXd::Ones(y.rows(), 1);
  VectorXd ry = residualize(y, zi);
  const double v0 = ry.squaredNorm();
  if (!(v0 > 1e-24 * std::max(1.0, y.squaredNorm())))
    throw Error(ErrorCode::DegenerateResponse, "response has no variation beyond the controls");
  MatrixXd full(y.rows(), x.cols() + zi.cols());
  full << x, zi;
  VectorXd r1 = residualize(y, full);
  const double r2 = 1.0 - r1.squaredNorm() / v0;
  if (r2 >= 1.0 - 1e-12)
    throw Error(ErrorCode::DegenerateResponse, "response is an exact linear function of the regressors");
  return std::max(r2, 0.0);
}

MatrixXd with_intercept(const MatrixXd& c) {
  MatrixXd out(c.rows(), c.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(c.cols()) = c;
  return out;
}

MatrixXd hcat(std::initializer_list<MatrixXd> blocks) {
  Eigen::Index rows = -1, cols = 0;
  for (const auto& b : blocks) {
    if (rows < 0) rows = b.rows();
    if (b.rows() != rows) throw Error(ErrorCode::DimensionMismatch, "hcat row counts differ");
    cols += b.cols();
  }
  MatrixXd out(std::max<Eigen::Index>(rows, 0), cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return out;
}

}  // namespace medsens
