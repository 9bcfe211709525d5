#include "medsens/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "medsens/error.hpp"

namespace medsens {

namespace {

struct Rect {
  VectorXd center;          // unit-cube coordinates
  std::vector<int> level;   // side length along dim i is 3^-level[i]
  double f = 0.0;
  int max_side_level() const { return *std::min_element(level.begin(), level.end()); }
};

constexpr int kMaxLevel = 30;

}  // namespace

OptimizeResult direct_optimize(const std::function<double(const VectorXd&)>& objective, const VectorXd& lower,
                               const VectorXd& upper, const DirectOptions& opts) {
  const Eigen::Index d = lower.size();
  if (d < 1 || upper.size() != d) throw Error(ErrorCode::DimensionMismatch, "box bounds must share a positive dimension");
  for (Eigen::Index i = 0; i < d; ++i)
    if (!(lower(i) < upper(i))) throw Error(ErrorCode::InvalidArgument, "lower must be below upper in every coordinate");
  if (opts.budget < 2 * d + 1) throw Error(ErrorCode::BudgetTooSmall, "budget must be at least 2d+1 evaluations");

  const VectorXd width = upper - lower;
  OptimizeResult best;
  best.min = std::numeric_limits<double>::infinity();
  auto eval = [&](const VectorXd& unit) {
    VectorXd x = lower + width.cwiseProduct(unit);
    double f = objective(x);
    if (std::isnan(f)) f = std::numeric_limits<double>::infinity();
    ++best.evaluations;
    if (f < best.min || best.argmin.size() == 0) {
      best.min = f;
      best.argmin = x;
    }
    return f;
  };

  std::vector<Rect> rects;
  rects.push_back({VectorXd::Constant(d, 0.5), std::vector<int>(d, 0), 0.0});
  rects[0].f = eval(rects[0].center);

  std::vector<double> side(kMaxLevel + 2);
  for (int k = 0; k < kMaxLevel + 2; ++k) side[k] = std::pow(3.0, -k);

  bool exhausted = false;
  while (!exhausted && best.evaluations < opts.budget) {
    // Best rectangle per size class (size = longest side), lowest index on ties.
    std::map<int, std::size_t> best_of_size;  // keyed by level of longest side
    for (std::size_t i = 0; i < rects.size(); ++i) {
      const int lv = rects[i].max_side_level();
      if (lv >= kMaxLevel) continue;
      auto it = best_of_size.find(lv);
      if (it == best_of_size.end() || rects[i].f < rects[it->second].f) best_of_size[lv] = i;
    }
    if (best_of_size.empty()) break;

    std::vector<std::size_t> cand;
    std::vector<double> sz, fv;
    for (auto it = best_of_size.rbegin(); it != best_of_size.rend(); ++it) {  // ascending size
      cand.push_back(it->second);
      sz.push_back(side[it->first]);
      fv.push_back(rects[it->second].f);
    }
    const double fmin = best.min;
    std::vector<std::size_t> selected;
    for (std::size_t j = 0; j < cand.size(); ++j) {
      if (!std::isfinite(fv[j])) continue;
      double k_low = 0.0, k_up = std::numeric_limits<double>::infinity();
      bool ok = true;
      for (std::size_t i = 0; i < cand.size() && ok; ++i) {
        if (i == j) continue;
        if (sz[i] < sz[j]) {
          k_low = std::max(k_low, (fv[j] - fv[i]) / (sz[j] - sz[i]));
        } else {
          const double k = (fv[i] - fv[j]) / (sz[i] - sz[j]);
          if (k <= 0.0) ok = false;
          k_up = std::min(k_up, k);
        }
      }
      if (!ok || k_low > k_up) continue;
      if (std::isfinite(k_up) && fv[j] - k_up * sz[j] > fmin - opts.epsilon * std::abs(fmin)) continue;
      selected.push_back(cand[j]);
    }
    if (selected.empty()) selected.push_back(cand.back());

    // Largest rectangles first.
    std::sort(selected.begin(), selected.end(), [&](std::size_t x, std::size_t y) {
      const int lx = rects[x].max_side_level(), ly = rects[y].max_side_level();
      return lx != ly ? lx < ly : x < y;
    });

    for (std::size_t idx : selected) {
      if (best.evaluations >= opts.budget) break;
      Rect parent = rects[idx];
      const int lv = parent.max_side_level();
      std::vector<Eigen::Index> dims;
      for (Eigen::Index i = 0; i < d; ++i)
        if (parent.level[i] == lv) dims.push_back(i);
      const double delta = side[lv + 1];

      struct Probe {
        Eigen::Index dim;
        double f_lo, f_hi, w;
      };
      std::vector<Probe> probes;
      for (Eigen::Index i : dims) {
        if (best.evaluations + 2 > opts.budget) break;
        VectorXd lo = parent.center, hi = parent.center;
        lo(i) -= delta;
        hi(i) += delta;
        const double fl = eval(lo), fh = eval(hi);
        probes.push_back({i, fl, fh, std::min(fl, fh)});
      }
      if (probes.empty()) {
        exhausted = true;
        break;
      }
      std::stable_sort(probes.begin(), probes.end(), [](const Probe& x, const Probe& y) { return x.w < y.w; });

      for (const Probe& pr : probes) {
        parent.level[pr.dim] += 1;
        Rect lo_rect = parent, hi_rect = parent;
        lo_rect.center(pr.dim) -= delta;
        hi_rect.center(pr.dim) += delta;
        lo_rect.f = pr.f_lo;
        hi_rect.f = pr.f_hi;
        rects.push_back(std::move(lo_rect));
        rects.push_back(std::move(hi_rect));
      }
      rects[idx] = parent;
    }
  }
  return best;
}

}  // namespace medsens
