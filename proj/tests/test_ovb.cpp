#include <doctest.h>

#include "helpers.hpp"
#include "medsens/error.hpp"
#include "medsens/oracle.hpp"
#include "medsens/ovb.hpp"

using namespace medsens;

namespace {

struct OvbCase {
  MatrixXd y, a, c;
};

OvbCase random_case(std::mt19937_64& rng, Eigen::Index n, Eigen::Index dy, Eigen::Index da) {
  OvbCase k;
  k.c = with_intercept(testkit::normal_matrix(rng, n, 2));
  k.a = testkit::normal_matrix(rng, n, da) + k.c.col(1) * MatrixXd::Constant(1, da, 0.4);
  k.y = k.a * testkit::normal_matrix(rng, da, dy) + testkit::normal_matrix(rng, n, dy) +
        k.c.col(2) * MatrixXd::Constant(1, dy, -0.3);
  return k;
}

// a-coefficients of the long regression of each y column on (a, c, u).
MatrixXd long_theta(const OvbCase& k, const MatrixXd& u) {
  LsFit fit = ols_fit(k.y, hcat({k.a, k.c, u}));
  return fit.coefficients.topRows(k.a.cols()).transpose();
}

MatrixXd construct_u(const OvbCase& k, const MatrixXd& r_a, const MatrixXd& r_y, const MatrixXd& cov_u) {
  std::vector<MatrixXd> blocks = {residualize(k.a, k.c), residualize(k.y, hcat({k.a, k.c}))};
  return construct_from_blocks(blocks, {r_a, r_y}, hcat({k.c, k.a, k.y}), cov_u);
}

}  // namespace

TEST_CASE("zero sensitivity returns the short-regression coefficient exactly") {
  std::mt19937_64 rng(21);
  OvbCase k = random_case(rng, 60, 1, 1);
  OvbMoments m = ovb_moments(k.y, k.a, k.c);
  ScalarUSensitivity s{VectorXd::Zero(1), VectorXd::Constant(1, 0.5)};
  CHECK(adjust_scalar_u(m, s) == m.theta_obs);
  VectorUSensitivity v{MatrixXd::Zero(1, 2), MatrixXd::Constant(1, 2, 0.3), {}};
  CHECK(adjust_vector_u(m, v) == m.theta_obs);
}

TEST_CASE("scalar closed form with equal strengths") {
  std::mt19937_64 rng(22);
  OvbCase k = random_case(rng, 80, 1, 1);
  OvbMoments m = ovb_moments(k.y, k.a, k.c);
  for (double r : {-0.7, -0.2, 0.3, 0.8}) {
    ScalarUSensitivity s{VectorXd::Constant(1, r), VectorXd::Constant(1, r)};
    const double bias = adjust_scalar_u(m, s)(0, 0) - m.theta_obs(0, 0);
    const double magnitude = r * r / std::sqrt(1 - r * r) * std::sqrt(m.cov_y_res(0, 0) / m.cov_a_res(0, 0));
    CHECK(bias == doctest::Approx(-magnitude).epsilon(1e-12));
  }
}

TEST_CASE("scalar adjustment equals the long regression on a constructed confounder") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index dy = 1 + rep % 2, da = 1 + (rep / 2) % 2;
    OvbCase k = random_case(rng, 40 + rep, dy, da);
    OvbMoments m = ovb_moments(k.y, k.a, k.c);
    ScalarUSensitivity s{testkit::random_in_ball(rng, dy, 0.9), testkit::random_in_ball(rng, da, 0.9)};
    MatrixXd u = construct_u(k, s.r_a_u, s.r_y_u, MatrixXd::Identity(1, 1));
    MatrixXd adj = adjust_scalar_u(m, s);
    MatrixXd ref = long_theta(k, u);
    CHECK((adj - ref).cwiseAbs().maxCoeff() / std::max(1e-3, ref.cwiseAbs().maxCoeff()) < 1e-8);
  }
}

TEST_CASE("vector adjustment equals the long regression with a two-column confounder") {
  std::mt19937_64 rng(24);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index dy = 1 + rep % 2, da = 1 + (rep / 2) % 2, du = 2;
    OvbCase k = random_case(rng, 50, dy, da);
    OvbMoments m = ovb_moments(k.y, k.a, k.c);
    MatrixXd g = testkit::normal_matrix(rng, du, du);
    MatrixXd cov_u = g * g.transpose() + 0.5 * MatrixXd::Identity(du, du);
    // Random R matrices scaled to spectral norm 0.8.
    MatrixXd ra = testkit::normal_matrix(rng, da, du), ry = testkit::normal_matrix(rng, dy, du);
    ra *= 0.8 / spectral_norm(ra);
    ry *= 0.8 / spectral_norm(ry);
    MatrixXd u = construct_u(k, ra, ry, cov_u);
    CHECK((r_matrix(k.a, u, k.c) - ra).norm() < 1e-9);
    MatrixXd adj = adjust_vector_u(m, VectorUSensitivity{ry, ra, cov_u});
    MatrixXd ref = long_theta(k, u);
    CHECK((adj - ref).cwiseAbs().maxCoeff() / std::max(1e-3, ref.cwiseAbs().maxCoeff()) < 1e-8);
  }
}

TEST_CASE("vector adjuster with one confounder column reduces to the scalar one") {
  std::mt19937_64 rng(25);
  OvbCase k = random_case(rng, 60, 2, 2);
  OvbMoments m = ovb_moments(k.y, k.a, k.c);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    VectorXd ry = testkit::random_in_ball(rng, 2, 0.95), ra = testkit::random_in_ball(rng, 2, 0.95);
    MatrixXd s = adjust_scalar_u(m, ScalarUSensitivity{ry, ra});
    MatrixXd v = adjust_vector_u(m, VectorUSensitivity{ry, ra, MatrixXd::Identity(1, 1)});
    worst = std::max(worst, (s - v).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("bias magnitude grows with the outcome strength") {
  std::mt19937_64 rng(26);
  OvbCase k = random_case(rng, 60, 1, 1);
  OvbMoments m = ovb_moments(k.y, k.a, k.c);
  double prev = 0.0;
  for (double r = 0.05; r < 0.99; r += 0.05) {
    const double b = std::abs(adjust_scalar_u(m, {VectorXd::Constant(1, r), VectorXd::Constant(1, 0.4)})(0, 0) -
                              m.theta_obs(0, 0));
    CHECK(b > prev);
    prev = b;
  }
}

TEST_CASE("boundary strengths are rejected") {
  std::mt19937_64 rng(27);
  OvbCase k = random_case(rng, 30, 1, 1);
  OvbMoments m = ovb_moments(k.y, k.a, k.c);
  CHECK_THROWS_AS(adjust_scalar_u(m, {VectorXd::Constant(1, 1.0), VectorXd::Constant(1, 0.2)}), Error);
  CHECK_THROWS_AS(adjust_scalar_u(m, {VectorXd::Constant(1, 0.2), VectorXd::Constant(1, -1.0)}), Error);
}

TEST_CASE("cov_u_update") {
  MatrixXd one = MatrixXd::Identity(1, 1);
  CHECK(cov_u_update(one, MatrixXd::Constant(1, 1, 0.6))(0, 0) == doctest::Approx(1 - 0.36));
  std::mt19937_64 rng(28);
  MatrixXd g = testkit::normal_matrix(rng, 3, 3);
  MatrixXd cov = g * g.transpose() + MatrixXd::Identity(3, 3);
  CHECK((cov_u_update(cov, MatrixXd::Zero(2, 3)) - cov).norm() == 0.0);
  MatrixXd r = testkit::normal_matrix(rng, 2, 3);
  r *= 0.9 / spectral_norm(r);
  MatrixXd out = cov_u_update(cov, r);
  // Independent route through an explicit eigendecomposition.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es_cov(cov);
  MatrixXd root = es_cov.eigenvectors() * es_cov.eigenvalues().cwiseSqrt().asDiagonal() *
                  es_cov.eigenvectors().transpose();
  MatrixXd ref = root * (MatrixXd::Identity(3, 3) - r.transpose() * r) * root;
  CHECK((out - ref).norm() < 1e-12);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(out);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}
