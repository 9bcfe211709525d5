#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "medsens/mediation.hpp"

namespace medsens {

struct BootstrapOptions {
  int n_resamples = 1000;
  std::uint64_t seed = 20240601;
  unsigned threads = 0;  // 0 picks the hardware concurrency
  int max_retries = 10;  // redraws allowed per resample when its covariance is singular
};

struct BootstrapPlan {
  int n_resamples = 0;
  std::uint64_t seed = 0;
  std::vector<MediationMoments> resample_moments;
  int redraws = 0;
};

// Row indices of resample i (attempt k after k singular draws); a pure function of its arguments.
std::vector<Eigen::Index> resample_indices(Eigen::Index n, std::uint64_t seed, std::uint64_t i,
                                           std::uint64_t attempt = 0);
MediationMoments moments_from_indices(const MediationData& data, const std::vector<Eigen::Index>& rows);

BootstrapPlan bootstrap_moments(const MediationData& data, const BootstrapOptions& opts = {});

struct BootstrapSummary {
  double std_err = 0.0;
  double ci_lower = 0.0;  // 2.5% percentile
  double ci_upper = 0.0;  // 97.5% percentile
};

BootstrapSummary bootstrap_se(const BootstrapPlan& plan,
                              const std::function<double(const MediationMoments&)>& estimator);

// Sample standard deviation with divisor B-1 (0 for a single value).
double sample_sd(const std::vector<double>& v);
double quantile(std::vector<double> v, double prob);

// Runs fn(i) for i in [0, count) over a pool of threads; the first exception by index is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace medsens
