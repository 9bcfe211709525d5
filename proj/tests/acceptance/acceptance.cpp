// One PASS/FAIL line per acceptance criterion. Pass criterion numbers as arguments to run a subset.
#include <chrono>
#include <cstdio>
#include <set>
#include <string>

#include "../helpers.hpp"
#include "medsens/benchmarking.hpp"
#include "medsens/error.hpp"
#include "medsens/oracle.hpp"
#include "medsens/ovb.hpp"
#include "medsens/robustness.hpp"

using namespace medsens;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Tally {
  double worst = 0.0;
  void add(double e) { worst = std::max(worst, std::isfinite(e) ? e : 1e300); }
};

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }
double rel(const VectorXd& x, const VectorXd& ref) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) e = std::max(e, rel(x(i), ref(i)));
  return e;
}
double abs_err(const VectorXd& x, const VectorXd& ref) { return (x - ref).cwiseAbs().maxCoeff(); }

bool report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d %s: %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  return pass;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Instances shared by criteria 1-4 and 9: n in {50, 200}, p (columns of c, intercept included) in {1, 2, 3},
// q in {1, 2, 3}, targets drawn from radius-0.9 balls.
struct Instance {
  testkit::OracleInstance general;
  VectorXd u_randomized;  // same data, confounder with zero exposure strength
  NaturalSensitivity natural_randomized;
  testkit::LongRegressions truth_randomized;
};

std::vector<Instance> make_instances(int per_cell) {
  std::mt19937_64 rng(20240601);
  std::vector<Instance> out;
  for (Eigen::Index n : {50, 200})
    for (Eigen::Index p = 1; p <= 3; ++p)
      for (Eigen::Index q = 1; q <= 3; ++q)
        for (int r = 0; r < per_cell; ++r) {
          Instance inst;
          inst.general = testkit::oracle_instance(rng, n, p - 1, q);
          inst.natural_randomized = testkit::random_natural(rng, q);
          inst.natural_randomized.r_a = 0.0;
          const auto& s = inst.natural_randomized;
          inst.u_randomized = construct_confounder(inst.general.data, ConfounderTarget{s.r_y, s.r_m, 0.0, 1.0});
          inst.truth_randomized = testkit::long_regressions(inst.general.data, inst.u_randomized);
          out.push_back(std::move(inst));
        }
  return out;
}

double sharpness_error(const MediationData& d, const VectorXd& u, const NaturalSensitivity& s) {
  double e = std::abs(r_matrix(d.a, u, d.c)(0, 0) - s.r_a);
  e = std::max(e, abs_err(r_matrix(d.m, u, hcat({d.a, d.c})).col(0), s.r_m));
  return std::max(e, std::abs(r_matrix(d.y, u, hcat({d.a, d.m, d.c}))(0, 0) - s.r_y));
}

bool criterion1(const std::vector<Instance>& insts, double elapsed_build) {
  const auto t0 = Clock::now();
  Tally direct, product, difference, rdirect, rindirect, cdirect, cindirect;
  int classical = 0;
  for (const auto& inst : insts) {
    const auto& g = inst.general;
    MediationMoments mm = fit_observed(g.data);
    const auto& t = g.truth;
    direct.add(rel(direct_adjusted(mm, g.natural), t.theta1));
    product.add(rel(indirect_adjusted_product(mm, g.natural), t.theta3.dot(t.beta1)));
    difference.add(rel(indirect_adjusted_difference(mm, g.natural), t.gamma1 - t.theta1));
    const auto& sr = inst.natural_randomized;
    const auto& tr = inst.truth_randomized;
    rdirect.add(rel(direct_randomized(mm, sr.r_y, sr.r_m), tr.theta1));
    rindirect.add(rel(indirect_randomized(mm, sr.r_y, sr.r_m), tr.theta3.dot(tr.beta1)));
    if (mm.q == 1) {
      ++classical;
      const MediationData& d = g.data;
      R2Sensitivity r2{partial_r2(d.y, g.u, hcat({d.a, d.m, d.c})), partial_r2(d.m.col(0), g.u, hcat({d.a, d.c})),
                       partial_r2(d.a, g.u, d.c)};
      DirectSigns ds{sgn(t.theta1 - mm.theta1_obs), sgn(mm.beta1_obs(0)) * sgn(mm.beta1_obs(0) - t.beta1(0))};
      IndirectSigns is{sgn(t.beta1(0) - mm.beta1_obs(0)), sgn(t.theta3(0) - mm.theta3_obs(0))};
      EffectReport dr = direct_sample_classical(mm, r2, ds);
      EffectReport ir = indirect_sample_classical(mm, r2, is);
      const double b = t.beta1(0), th = t.theta3(0);
      const double se = std::sqrt(b * b * t.se_theta3 * t.se_theta3 + th * th * t.se_beta1 * t.se_beta1);
      cdirect.add(std::max(rel(dr.estimate, t.theta1), rel(dr.std_err, t.se_theta1)));
      cindirect.add(std::max(rel(ir.estimate, b * th), rel(ir.std_err, se)));
    }
  }
  const double elapsed = elapsed_build + seconds_since(t0);
  double worst = 0.0;
  for (const Tally* x : {&direct, &product, &difference, &rdirect, &rindirect, &cdirect, &cindirect})
    worst = std::max(worst, x->worst);
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%zu instances (%d single-mediator for the classical-SE variant); max relative error direct %.2e, "
                "indirect product %.2e, indirect difference %.2e, randomized direct %.2e, randomized indirect %.2e, "
                "classical direct %.2e, classical indirect %.2e; %.1f s (limit 1e-8, 60 s)",
                insts.size(), classical, direct.worst, product.worst, difference.worst, rdirect.worst, rindirect.worst,
                cdirect.worst, cindirect.worst, elapsed);
  return report(1, insts.size() >= 500 && worst < 1e-8 && elapsed < 60.0, buf);
}

bool criterion2(const std::vector<Instance>& insts) {
  Tally t;
  for (const auto& inst : insts) {
    t.add(sharpness_error(inst.general.data, inst.general.u, inst.general.natural));
    t.add(sharpness_error(inst.general.data, inst.u_randomized, inst.natural_randomized));
  }
  return report(2, t.worst < 1e-8,
                std::to_string(2 * insts.size()) + " constructed confounders; max |R - target| " +
                    fmt("%.2e (limit 1e-8)", t.worst));
}

bool criterion3(const std::vector<Instance>& insts) {
  Tally t;
  for (const auto& inst : insts) {
    MediationMoments mm = fit_observed(inst.general.data);
    for (const NaturalSensitivity* s : {&inst.general.natural, &inst.natural_randomized})
      t.add(std::abs(indirect_adjusted_product(mm, *s) - indirect_adjusted_difference(mm, *s)));
  }
  return report(3, t.worst < 1e-9, "max |product - difference| " + fmt("%.2e (limit 1e-9)", t.worst));
}

bool criterion4(const std::vector<Instance>& insts) {
  int mismatches = 0;
  for (const auto& inst : insts) {
    const MediationData& d = inst.general.data;
    MediationMoments mm = fit_observed(d);
    const NaturalSensitivity z = NaturalSensitivity::zero(mm.q);
    mismatches += direct_adjusted(mm, z) != mm.theta1_obs;
    mismatches += indirect_adjusted_product(mm, z) != mm.indirect_obs();
    mismatches += indirect_adjusted_difference(mm, z) != gamma1_adjusted(mm, z) - direct_adjusted(mm, z);
    mismatches += gamma1_adjusted(mm, z) != mm.gamma1_obs;
    mismatches += direct_randomized(mm, 0.0, z.r_m) != mm.theta1_obs;
    mismatches += indirect_randomized(mm, 0.0, z.r_m) != mm.indirect_obs();
    mismatches += beta1_adjusted(mm, z) != mm.beta1_obs;
    mismatches += theta3_adjusted(mm, z) != mm.theta3_obs;
    OvbMoments om = ovb_moments(hcat({d.y}), hcat({d.a}), d.c);
    mismatches += adjust_scalar_u(om, {VectorXd::Zero(1), VectorXd::Zero(1)}) != om.theta_obs;
    mismatches += adjust_vector_u(om, {MatrixXd::Zero(1, 2), MatrixXd::Zero(1, 2), {}}) != om.theta_obs;
    if (mm.q == 1) {
      mismatches += direct_sample_classical(mm, R2Sensitivity{}, DirectSigns{1, 1}).estimate != mm.theta1_obs;
      mismatches += indirect_sample_classical(mm, R2Sensitivity{}, IndirectSigns{1, 1}).estimate !=
                    mm.beta1_obs(0) * mm.theta3_obs(0);
    }
  }
  // Datasets with no effects: every insignificant observed effect must have rv_ci = 0.
  std::mt19937_64 rng(4);
  int insignificant = 0, bad_rv = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::Index n = 100, q = 1 + rep % 3;
    MatrixXd c = testkit::normal_matrix(rng, n, 1);
    VectorXd a = testkit::normal_matrix(rng, n, 1).col(0);
    MatrixXd m = testkit::normal_matrix(rng, n, q);
    VectorXd y = testkit::normal_matrix(rng, n, 1).col(0);
    MediationData d = make_mediation_data(y, a, m, c);
    MediationMoments mm = fit_observed(d);
    BootstrapPlan plan = bootstrap_moments(d, BootstrapOptions{200, 9, 1, 10});
    for (EffectKind kind : {EffectKind::Direct, EffectKind::Indirect}) {
      LinearizedEffect lin = linearize(mm, plan, kind);
      if (lin.observed_t() >= 1.96) continue;
      ++insignificant;
      RVOptions o;
      o.search.budget = 500;
      RVReport r = robustness_value(lin, default_rho_grid(), o);
      bad_rv += r.rv_ci != 0.0;
    }
  }
  return report(4, mismatches == 0 && bad_rv == 0 && insignificant > 0,
                std::to_string(mismatches) + " zero-sensitivity mismatches over " + std::to_string(insts.size()) +
                    " instances; " + std::to_string(bad_rv) + " of " + std::to_string(insignificant) +
                    " insignificant effects with rv_ci != 0");
}

double grid_min_t(const LinearizedEffect& lin, double rho, int points) {
  const double r = std::sqrt(rho);
  double best = lin.observed_t();
  NaturalSensitivity s = NaturalSensitivity::zero(1);
  for (int i = 0; i < points; ++i) {
    s.r_y = -r + 2 * r * i / (points - 1);
    for (int j = 0; j < points; ++j) {
      s.r_m(0) = -r + 2 * r * j / (points - 1);
      for (int k = 0; k < points; ++k) {
        s.r_a = -r + 2 * r * k / (points - 1);
        best = std::min(best, lin.orientation * adjusted_t(lin, s));
      }
    }
  }
  return best;
}

bool criterion5() {
  std::mt19937_64 rng(5);
  double worst_gap = 0.0, worst_time = 0.0;
  int monotone_violations = 0;
  for (int ds = 0; ds < 3; ++ds) {
    MediationData d = testkit::random_data(rng, 200 + 100 * ds, ds, 1);
    const auto t0 = Clock::now();
    MediationMoments mm = fit_observed(d);
    BootstrapPlan plan = bootstrap_moments(d, BootstrapOptions{500, 77 + static_cast<std::uint64_t>(ds), 0, 10});
    RVOptions o;
    for (EffectKind kind : {EffectKind::Direct, EffectKind::Indirect}) {
      RVReport r = robustness_value(mm, plan, kind, default_rho_grid(), o);
      double prev = r.observed_t;
      for (const auto& [rho, t] : r.curve) {
        monotone_violations += t > prev;
        prev = t;
      }
    }
    worst_time = std::max(worst_time, seconds_since(t0));
    for (EffectKind kind : {EffectKind::Direct, EffectKind::Indirect}) {
      LinearizedEffect lin = linearize(mm, plan, kind);
      for (double rho : {0.1, 0.3}) {
        const double opt = min_t(lin, RhoBudget::common(rho), SearchOptions{}).min_t;
        worst_gap = std::max(worst_gap, std::abs(opt - grid_min_t(lin, rho, 200)));
      }
    }
  }
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "3 single-mediator datasets; max |optimizer - 200^3 grid| %.4f t-units (limit 0.02); %d increases "
                "along the default grid; slowest dataset %.1f s at B = 500 (limit 300 s)",
                worst_gap, monotone_violations, worst_time);
  return report(5, worst_gap < 0.02 && monotone_violations == 0 && worst_time < 300.0, buf);
}

bool criterion6() {
  std::mt19937_64 rng(6);
  int direct_diff = 0, order_viol = 0, eq_viol = 0, cases = 0;
  const std::vector<double> grid = default_rho_grid();
  for (Eigen::Index q = 1; q <= 3; ++q)
    for (bool randomized : {false, true}) {
      MediationData d = testkit::random_data(rng, 300, 1, q);
      MediationMoments mm = fit_observed(d);
      BootstrapPlan plan = bootstrap_moments(d, BootstrapOptions{300, 6 + static_cast<std::uint64_t>(q), 0, 10});
      RVOptions os, ov;
      os.search.randomized = ov.search.randomized = randomized;
      os.search.mode = ConfounderMode::ScalarU;
      ov.search.mode = ConfounderMode::VectorU;
      RVReport ds = robustness_value(mm, plan, EffectKind::Direct, grid, os);
      RVReport dv = robustness_value(mm, plan, EffectKind::Direct, grid, ov);
      RVReport is = robustness_value(mm, plan, EffectKind::Indirect, grid, os);
      RVReport iv = robustness_value(mm, plan, EffectKind::Indirect, grid, ov);
      ++cases;
      direct_diff += ds.rv_estimate != dv.rv_estimate || ds.rv_ci != dv.rv_ci;
      order_viol += iv.rv_estimate > is.rv_estimate || iv.rv_ci > is.rv_ci;
      if (q == 1 || randomized)
        eq_viol += std::abs(iv.rv_estimate - is.rv_estimate) > 0.01 + 1e-12 ||
                   std::abs(iv.rv_ci - is.rv_ci) > 0.01 + 1e-12;
      std::printf("  q=%ld randomized=%d direct RV %.2f/%.2f (scalar) %.2f/%.2f (vector); indirect RV %.2f/%.2f "
                  "(scalar) %.2f/%.2f (vector)\n",
                  static_cast<long>(q), randomized, ds.rv_estimate, ds.rv_ci, dv.rv_estimate, dv.rv_ci, is.rv_estimate,
                  is.rv_ci, iv.rv_estimate, iv.rv_ci);
    }
  return report(6, direct_diff == 0 && order_viol == 0 && eq_viol == 0,
                std::to_string(cases) + " datasets; direct RV differences " + std::to_string(direct_diff) +
                    ", indirect vector > scalar " + std::to_string(order_viol) +
                    ", equality misses beyond one grid step " + std::to_string(eq_viol));
}

bool criterion7() {
  const auto t0 = Clock::now();
  StudyOptions o;  // 20 replications, B = 200
  std::vector<S4Design> designs;
  for (double ra : {0.3, 0.5})
    for (double ry : {0.3, 0.5}) designs.push_back(S4Design{2, ra, ry, 500, 2024});
  auto rows = rv_ratio_study(designs, o);
  const StudyRow& main = rows[0];
  double ratio_sum = 0.0;
  for (const auto& r : rows) {
    ratio_sum += r.ratio;
    std::printf("  dim_m=2 R2(a~m)=%.1f R2(y~m|a)=%.1f: scalar %.3f vector %.3f ratio %.3f; CI scalar %.3f vector %.3f\n",
                r.design.r2_a_m, r.design.r2_y_m, r.mean_scalar, r.mean_vector, r.ratio, r.mean_ci_scalar,
                r.mean_ci_vector);
  }
  const double ratio = ratio_sum / static_cast<double>(rows.size());
  const double elapsed = seconds_since(t0);
  const bool pass = std::abs(main.mean_scalar - 0.236) <= 0.05 && std::abs(main.mean_vector - 0.171) <= 0.05 &&
                    ratio >= 0.6 && ratio <= 0.9 && elapsed < 900.0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "(0.3, 0.3) cell mean RV scalar %.3f (target 0.236 +/- 0.05), vector %.3f (target 0.171 +/- 0.05); "
                "mean vector/scalar ratio over the 2x2 sub-grid %.3f (range [0.6, 0.9]); %.0f s (limit 900 s)",
                main.mean_scalar, main.mean_vector, ratio, elapsed);
  return report(7, pass, buf);
}

bool criterion8() {
  std::mt19937_64 rng(8);
  const Eigen::Index n = 1000;
  MatrixXd c = testkit::normal_matrix(rng, n, 2);
  VectorXd a = testkit::normal_matrix(rng, n, 1).col(0) + 0.3 * c.col(0);
  MatrixXd m = 0.5 * a + testkit::normal_matrix(rng, n, 1).col(0) - 0.2 * c.col(1);
  VectorXd y = 0.4 * a + 0.6 * m.col(0) + 0.3 * c.col(0) + testkit::normal_matrix(rng, n, 1).col(0);
  MediationData d = make_mediation_data(y, a, m, c);
  MediationMoments mm = fit_observed(d);
  ClassicalFit cf = classical_standard_errors(mm);
  BootstrapPlan p1 = bootstrap_moments(d, BootstrapOptions{1000, 8, 1, 10});
  BootstrapPlan p8 = bootstrap_moments(d, BootstrapOptions{1000, 8, 8, 10});
  auto se = [&](const BootstrapPlan& p, auto f) { return bootstrap_se(p, f).std_err; };
  auto th1 = [](const MediationMoments& x) { return x.theta1_obs; };
  auto th3 = [](const MediationMoments& x) { return x.theta3_obs(0); };
  auto b1 = [](const MediationMoments& x) { return x.beta1_obs(0); };
  const double r1 = se(p1, th1) / cf.se_theta1, r3 = se(p1, th3) / cf.se_theta3, rb = se(p1, b1) / cf.se_beta1;
  const double worst = std::max({std::abs(r1 - 1), std::abs(r3 - 1), std::abs(rb - 1)});

  bool identical = true;
  for (std::size_t i = 0; i < p1.resample_moments.size(); ++i) {
    const auto &x = p1.resample_moments[i], &z = p8.resample_moments[i];
    identical = identical && x.theta1_obs == z.theta1_obs && x.theta3_obs == z.theta3_obs &&
                x.beta1_obs == z.beta1_obs && x.var_y_res_amc == z.var_y_res_amc;
  }
  RVOptions o1, o8;
  o1.threads = 1;
  o8.threads = 8;
  for (EffectKind kind : {EffectKind::Direct, EffectKind::Indirect}) {
    RVReport a1 = robustness_value(mm, p1, kind, default_rho_grid(), o1);
    RVReport a8 = robustness_value(mm, p8, kind, default_rho_grid(), o8);
    identical = identical && a1.curve == a8.curve && a1.rv_estimate == a8.rv_estimate && a1.rv_ci == a8.rv_ci;
  }
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "bootstrap/classical SE ratios theta1 %.3f, theta3 %.3f, beta1 %.3f (within 15%%); 1 vs 8 threads "
                "bitwise %s",
                r1, r3, rb, identical ? "identical" : "DIFFERENT");
  return report(8, worst < 0.15 && identical, buf);
}

bool criterion9(const std::vector<Instance>& insts) {
  Tally exposure_scalar, exposure_vector, mediator_total, benchmark, sample_r2, outcome_ac;
  for (const auto& inst : insts) {
    const auto& g = inst.general;
    const MediationData& d = g.data;
    MediationMoments mm = fit_observed(d);
    const VectorXd& u = g.u;
    const double r_aumc = r_matrix(d.a, u, hcat({d.m, d.c}))(0, 0);
    mediator_total.add(abs_err(r_muc_from_natural(mm, g.natural), r_matrix(d.m, u, d.c).col(0)));
    if (mm.q == 1) {
      exposure_scalar.add(std::abs(r_aumc_two_step(mm, g.natural) - r_aumc));
      R2Sensitivity r2{g.natural.r_y * g.natural.r_y, g.natural.r_m.squaredNorm(), g.natural.r_a * g.natural.r_a};
      const int s2 = sgn(mm.beta1_obs(0)) * sgn(mm.beta1_obs(0) - g.truth.beta1(0));
      sample_r2.add(std::abs(r2_aumc_from_natural(mm.r_m_a_c.squaredNorm(), r2, s2) - r_aumc * r_aumc));
    } else {
      exposure_vector.add(std::abs(r_aumc_from_natural(mm, g.natural) - r_aumc));
    }
    outcome_ac.add(std::abs(r_yuac_from_natural(mm, g.natural) - r_matrix(d.y, u, hcat({d.a, d.c}))(0, 0)));
    for (Eigen::Index j = 0; j + 1 < mm.p; ++j) {
      BenchmarkMoments bm = benchmark_moments(d, j);
      MatrixXd rest(d.n(), d.p() - 1);
      rest << d.c.leftCols(j + 1), d.c.rightCols(d.p() - j - 2);
      LeaveOneOutSensitivity s{r_matrix(d.a, u, rest)(0, 0), r_matrix(d.m, u, hcat({d.a, rest})).col(0),
                               r_matrix(d.y, u, hcat({d.a, d.m, rest}))(0, 0)};
      NaturalSensitivity nat = natural_from_benchmark(bm, s);
      double e = std::abs(nat.r_a - g.natural.r_a);
      e = std::max(e, abs_err(nat.r_m, g.natural.r_m));
      e = std::max(e, std::abs(nat.r_y - g.natural.r_y));
      benchmark.add(e);
    }
  }
  double worst = 0.0;
  for (const Tally* t : {&exposure_scalar, &exposure_vector, &mediator_total, &benchmark, &sample_r2, &outcome_ac})
    worst = std::max(worst, t->worst);
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "max |conversion - r_matrix| exposure given mediator (one mediator, two-step) %.2e, exposure given "
                "mediators (vector) %.2e, mediator given covariates %.2e, leave-one-out benchmark %.2e, sample R^2 "
                "%.2e, outcome given exposure %.2e (limit 1e-8)",
                exposure_scalar.worst, exposure_vector.worst, mediator_total.worst, benchmark.worst, sample_r2.worst,
                outcome_ac.worst);
  return report(9, worst < 1e-8, buf);
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));
  auto want = [&](int k) { return wanted.empty() || wanted.count(k) > 0; };

  int failed = 0;
  try {
    std::vector<Instance> insts;
    double build_time = 0.0;
    if (want(1) || want(2) || want(3) || want(4) || want(9)) {
      const auto t0 = Clock::now();
      insts = make_instances(28);
      build_time = seconds_since(t0);
    }
    if (want(1)) failed += !criterion1(insts, build_time);
    if (want(2)) failed += !criterion2(insts);
    if (want(3)) failed += !criterion3(insts);
    if (want(4)) failed += !criterion4(insts);
    if (want(5)) failed += !criterion5();
    if (want(6)) failed += !criterion6();
    if (want(7)) failed += !criterion7();
    if (want(8)) failed += !criterion8();
    if (want(9)) failed += !criterion9(insts);
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
