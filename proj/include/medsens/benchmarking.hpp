#pragma once

#include <optional>
#include <string>
#include <vector>

#include "medsens/robustness.hpp"

namespace medsens {

struct BenchmarkMoments {
  Eigen::Index j = 0;  // index among the non-intercept covariates
  std::string label;
  double r_a_cj = 0.0;   // R_{a~cj|c-j}
  VectorXd r_m_cj;       // R_{m~cj|a,c-j}
  double r_y_cj = 0.0;   // R_{y~cj|a,m,c-j}
  MatrixXd cov_m_ac;     // cov(m|a,c)
  MatrixXd cov_m_ac_mj;  // cov(m|a,c-j)
  MatrixXd m_factor;     // cov(m|a,c)^{-1/2} cov(m|a,c-j)^{1/2}

  double r2_a() const { return r_a_cj * r_a_cj; }
  double r2_m() const { return r_m_cj.squaredNorm(); }
  double r2_y() const { return r_y_cj * r_y_cj; }
};

// Confounder strengths measured after dropping c_j from the controls.
struct LeaveOneOutSensitivity {
  double r_a = 0.0;  // R_{a~u|c-j}
  VectorXd r_m;      // R_{m~u|a,c-j}
  double r_y = 0.0;  // R_{y~u|a,m,c-j}
};

BenchmarkMoments benchmark_moments(const MediationData& data, Eigen::Index j);

// Partial correlations of c_j with u that the conversion passes through.
double r_cj_u_ac(const BenchmarkMoments& bm, const LeaveOneOutSensitivity& s);
double r_cj_u_amc(const BenchmarkMoments& bm, const LeaveOneOutSensitivity& s);

NaturalSensitivity natural_from_benchmark(const BenchmarkMoments& bm, const LeaveOneOutSensitivity& s);

struct BenchmarkSpec {
  Eigen::Index j = 0;
  double k_a = 1.0;
  double k_m = 1.0;
  double k_y = 1.0;
  std::vector<double> delta_grid;
};

struct BenchmarkResult {
  double worst_estimate = 0.0;
  double worst_t = 0.0;  // t of the effect, not oriented
  LeaveOneOutSensitivity argmin_estimate;
  LeaveOneOutSensitivity argmin_t;
  NaturalSensitivity natural_at_worst_t;
};

struct BenchmarkOptions {
  int budget = 4000;
};

BenchmarkResult benchmark_worst(const LinearizedEffect& lin, const BenchmarkMoments& bm, const BenchmarkSpec& spec,
                                const BenchmarkOptions& opts = {});

// Smallest delta on the grid with worst oriented t at or below the threshold, taking k_m = k_y = delta and
// k_a = delta unless pinned to zero; 0 when the observed t already qualifies, nullopt when no grid point does.
std::optional<double> critical_delta(const LinearizedEffect& lin, const BenchmarkMoments& bm, double threshold,
                                     const std::vector<double>& delta_grid, bool pin_exposure,
                                     const BenchmarkOptions& opts = {});

std::vector<double> default_delta_grid();

}  // namespace medsens

namespace medsens {

struct DeltaPoint {
  double delta = 0.0;
  BenchmarkResult result;
};

// Worst cases along the delta grid with caps k_m = k_y = delta and k_a = delta (or 0 when pinned).
std::vector<DeltaPoint> benchmark_delta_curve(const LinearizedEffect& lin, const BenchmarkMoments& bm,
                                              const std::vector<double>& delta_grid, bool pin_exposure,
                                              const BenchmarkOptions& opts = {});

// Critical delta read off a delta curve (running minimum of the oriented worst t).
std::optional<double> critical_delta_from_curve(const LinearizedEffect& lin, const std::vector<DeltaPoint>& curve,
                                                double threshold);

}  // namespace medsens
