#include "medsens/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "medsens/error.hpp"

namespace medsens {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::vector<Eigen::Index> resample_indices(Eigen::Index n, std::uint64_t seed, std::uint64_t i,
                                           std::uint64_t attempt) {
  std::uint64_t state = seed;
  std::uint64_t key = splitmix64(state) ^ (i * 0xd1b54a32d192ed03ULL);
  state = key;
  key = splitmix64(state) ^ (attempt * 0x8cb92ba72f3d8dd7ULL);
  state = key;
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  const auto un = static_cast<unsigned __int128>(n);
  for (auto& r : rows) r = static_cast<Eigen::Index>((static_cast<unsigned __int128>(splitmix64(state)) * un) >> 64);
  return rows;
}

MediationMoments moments_from_indices(const MediationData& data, const std::vector<Eigen::Index>& rows) {
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  MediationData r;
  r.y.resize(n);
  r.a.resize(n);
  r.m.resize(n, data.q());
  r.c.resize(n, data.p());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index k = rows[static_cast<std::size_t>(i)];
    r.y(i) = data.y(k);
    r.a(i) = data.a(k);
    r.m.row(i) = data.m.row(k);
    r.c.row(i) = data.c.row(k);
  }
  return fit_observed(r);
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

BootstrapPlan bootstrap_moments(const MediationData& data, const BootstrapOptions& opts) {
  if (opts.n_resamples < 1) throw Error(ErrorCode::InvalidArgument, "bootstrap needs at least one resample");
  BootstrapPlan plan;
  plan.n_resamples = opts.n_resamples;
  plan.seed = opts.seed;
  plan.resample_moments.resize(static_cast<std::size_t>(opts.n_resamples));
  std::vector<int> redraws(plan.resample_moments.size(), 0);

  parallel_for(plan.resample_moments.size(), opts.threads, [&](std::size_t i) {
    for (int attempt = 0;; ++attempt) {
      try {
        plan.resample_moments[i] = moments_from_indices(data, resample_indices(data.n(), opts.seed, i, attempt));
        redraws[i] = attempt;
        return;
      } catch (const Error& e) {
        const bool singular = e.code() == ErrorCode::SingularCovariance || e.code() == ErrorCode::RankDeficient;
        if (!singular) throw;
        if (attempt >= opts.max_retries)
          throw Error(ErrorCode::TooManySingularResamples,
                      "resample " + std::to_string(i) + " stayed singular after " + std::to_string(attempt) + " redraws");
      }
    }
  });
  for (int r : redraws) plan.redraws += r;
  return plan;
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2 || std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double quantile(std::vector<double> v, double prob) {
  if (v.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = prob * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

BootstrapSummary bootstrap_se(const BootstrapPlan& plan,
                              const std::function<double(const MediationMoments&)>& estimator) {
  std::vector<double> values(plan.resample_moments.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    try {
      values[i] = estimator(plan.resample_moments[i]);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::EstimatorFailed, "resample " + std::to_string(i) + ": " + e.what());
    }
    if (!std::isfinite(values[i]))
      throw Error(ErrorCode::EstimatorFailed, "resample " + std::to_string(i) + " gave a non-finite value");
  }
  BootstrapSummary s;
  s.std_err = sample_sd(values);
  s.ci_lower = quantile(values, 0.025);
  s.ci_upper = quantile(values, 0.975);
  return s;
}

}  // namespace medsens
