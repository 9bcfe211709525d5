#include "medsens/benchmarking.hpp"

#include <cmath>
#include <limits>

#include "medsens/error.hpp"

namespace medsens {

namespace {

constexpr double kBoundary = 1.0 - 1e-12;
constexpr double kRadiusCap = 1.0 - 1e-9;

double root1m(double r2, const char* what) {
  if (!(r2 < kBoundary)) throw Error(ErrorCode::DegenerateAnchor, std::string(what) + " is on the unit sphere");
  return std::sqrt(1.0 - r2);
}

void check_leave_j(const BenchmarkMoments& bm, const LeaveOneOutSensitivity& s) {
  if (s.r_m.size() != bm.r_m_cj.size())
    throw Error(ErrorCode::DimensionMismatch, "R_{m~u|a,c-j} needs one entry per mediator");
  if (std::abs(s.r_a) >= kBoundary || std::abs(s.r_y) >= kBoundary || s.r_m.norm() >= kBoundary)
    throw Error(ErrorCode::BoundaryR, "leave-one-out parameters must lie in the open unit ball");
}

}  // namespace

BenchmarkMoments benchmark_moments(const MediationData& data, Eigen::Index j) {
  const Eigen::Index k = data.p() - 1;
  if (j < 0 || j >= k) throw Error(ErrorCode::InvalidArgument, "benchmark covariate index out of range");
  const Eigen::Index col = j + 1;
  MatrixXd cj = data.c.col(col);
  MatrixXd c_mj(data.n(), data.p() - 1);
  c_mj << data.c.leftCols(col), data.c.rightCols(data.p() - col - 1);

  // Fails with RankDeficient when c_j is collinear with the rest.
  MatrixXd ac = hcat({data.a, data.c});
  MatrixXd m_ac = residualize(data.m, ac);

  BenchmarkMoments bm;
  bm.j = j;
  bm.label = j < static_cast<Eigen::Index>(data.covariate_labels.size()) ? data.covariate_labels[j]
                                                                         : "c" + std::to_string(j + 1);
  MatrixXd a_mj = hcat({data.a, c_mj});
  MatrixXd am_mj = hcat({data.a, data.m, c_mj});
  bm.r_a_cj = r_matrix(data.a, cj, c_mj)(0, 0);
  bm.r_m_cj = r_matrix(data.m, cj, a_mj).col(0);
  bm.r_y_cj = r_matrix(data.y, cj, am_mj)(0, 0);
  bm.cov_m_ac = sample_cov(m_ac);
  bm.cov_m_ac_mj = sample_cov(residualize(data.m, a_mj));
  bm.m_factor = sym_inv_sqrt(bm.cov_m_ac) * sym_sqrt(bm.cov_m_ac_mj);
  return bm;
}

double r_cj_u_ac(const BenchmarkMoments& bm, const LeaveOneOutSensitivity& s) {
  check_leave_j(bm, s);
  return -bm.r_a_cj * s.r_a / (std::sqrt(1.0 - s.r_a * s.r_a) * root1m(bm.r2_a(), "R_{a~cj|c-j}"));
}

double r_cj_u_amc(const BenchmarkMoments& bm, const LeaveOneOutSensitivity& s) {
  const double base = r_cj_u_ac(bm, s);
  return (base - bm.r_m_cj.dot(s.r_m)) /
         (root1m(bm.r2_m(), "R_{m~cj|a,c-j}") * std::sqrt(1.0 - s.r_m.squaredNorm()));
}

NaturalSensitivity natural_from_benchmark(const BenchmarkMoments& bm, const LeaveOneOutSensitivity& s) {
  const double cu_ac = r_cj_u_ac(bm, s);
  const double cu_amc = r_cj_u_amc(bm, s);
  NaturalSensitivity out;
  out.r_a = s.r_a / root1m(bm.r2_a(), "R_{a~cj|c-j}");
  out.r_m = bm.m_factor * (s.r_m - bm.r_m_cj * cu_ac) / root1m(cu_ac * cu_ac, "R_{cj~u|a,c-j}");
  out.r_y = (s.r_y - bm.r_y_cj * cu_amc) /
            (root1m(bm.r2_y(), "R_{y~cj|a,m,c-j}") * root1m(cu_amc * cu_amc, "R_{cj~u|a,m,c-j}"));
  if (std::abs(out.r_a) >= kBoundary || std::abs(out.r_y) >= kBoundary || out.r_m.norm() >= kBoundary)
    throw Error(ErrorCode::BoundaryR, "leave-one-out parameters imply a confounder outside the feasible region");
  return out;
}

namespace {

struct LeaveJSpace {
  VectorXd lower, upper;
  Eigen::Index q = 0;
  LeaveOneOutSensitivity read(const VectorXd& x) const {
    LeaveOneOutSensitivity s;
    s.r_a = x(0);
    s.r_y = x(1);
    if (q == 1) {
      s.r_m = VectorXd::Constant(1, x(2));
    } else {
      s.r_m.resize(q);
      double sn = 1.0;
      for (Eigen::Index i = 0; i + 1 < q; ++i) {
        s.r_m(i) = sn * std::cos(x(3 + i));
        sn *= std::sin(x(3 + i));
      }
      s.r_m(q - 1) = sn;
      s.r_m *= x(2);
    }
    return s;
  }
};

double capped_radius(double k, double anchor2) {
  if (!(k >= 0.0) || !std::isfinite(k)) throw Error(ErrorCode::InvalidArgument, "benchmark caps must be finite and >= 0");
  if (k == 0.0 || anchor2 == 0.0) return 0.0;
  return std::min(std::sqrt(k * anchor2), kRadiusCap);
}

LeaveJSpace leave_j_space(const BenchmarkMoments& bm, const BenchmarkSpec& spec) {
  const Eigen::Index q = bm.r_m_cj.size();
  const double ra = capped_radius(spec.k_a, bm.r2_a());
  const double rm = capped_radius(spec.k_m, bm.r2_m());
  const double ry = capped_radius(spec.k_y, bm.r2_y());
  LeaveJSpace sp;
  sp.q = q;
  const Eigen::Index d = q == 1 ? 3 : 3 + q - 1;
  sp.lower.resize(d);
  sp.upper.resize(d);
  sp.lower.head(3) << -ra, -ry, q == 1 ? -rm : 0.0;
  sp.upper.head(3) << ra, ry, rm;
  for (Eigen::Index i = 0; i + 1 < q; ++i) {
    sp.lower(3 + i) = 0.0;
    // Angles are only meaningful when the mediator channel is open.
    sp.upper(3 + i) = rm > 0.0 ? (i + 2 < q ? M_PI : 2.0 * M_PI) : 0.0;
  }
  return sp;
}

VectorXd features_for(const LinearizedEffect& lin, const NaturalSensitivity& s) {
  return lin.kind == EffectKind::Direct ? direct_features(phi_direct_from_natural(s))
                                        : indirect_features(phi_indirect_from_natural(s));
}

struct WorstSearch {
  double value;
  LeaveOneOutSensitivity arg;
};

WorstSearch search_worst(const LinearizedEffect& lin, const BenchmarkMoments& bm, const BenchmarkSpec& spec,
                         const BenchmarkOptions& opts, bool use_t) {
  const LeaveJSpace sp = leave_j_space(bm, spec);
  auto value = [&](const NaturalSensitivity& s) {
    VectorXd f = features_for(lin, s);
    return use_t ? lin.oriented_t(f) : lin.orientation * lin.estimate(f);
  };
  auto feasible = [&](const LeaveOneOutSensitivity& s, NaturalSensitivity& out) {
    try {
      out = natural_from_benchmark(bm, s);
      return true;
    } catch (const Error&) {
      return false;
    }
  };
  // Infeasible points are pulled back along the ray to the origin, so the objective stays finite and
  // continuous across the boundary of the feasible region.
  auto pull_back = [&](const VectorXd& x, NaturalSensitivity& nat) {
    const LeaveOneOutSensitivity s = sp.read(x);
    if (feasible(s, nat)) return s;
    double lo = 0.0, hi = 1.0;
    LeaveOneOutSensitivity at_lo{0.0, VectorXd::Zero(sp.q), 0.0};
    NaturalSensitivity nat_lo = NaturalSensitivity::zero(sp.q);
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      LeaveOneOutSensitivity t{mid * s.r_a, mid * s.r_m, mid * s.r_y};
      if (feasible(t, nat)) {
        lo = mid;
        at_lo = t;
        nat_lo = nat;
      } else {
        hi = mid;
      }
    }
    nat = nat_lo;
    return at_lo;
  };
  auto objective = [&](const VectorXd& x) {
    NaturalSensitivity nat;
    pull_back(x, nat);
    return value(nat);
  };
  WorstSearch best{value(NaturalSensitivity::zero(sp.q)), LeaveOneOutSensitivity{0.0, VectorXd::Zero(sp.q), 0.0}};

  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < sp.lower.size(); ++i)
    if (sp.upper(i) > sp.lower(i)) free.push_back(i);
  if (free.empty()) return best;
  const auto d = static_cast<Eigen::Index>(free.size());
  VectorXd lo(d), hi(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    lo(k) = sp.lower(free[k]);
    hi(k) = sp.upper(free[k]);
  }
  auto embed = [&](const VectorXd& z) {
    VectorXd x = VectorXd::Zero(sp.lower.size());
    for (Eigen::Index k = 0; k < d; ++k) x(free[k]) = z(k);
    return x;
  };
  DirectOptions o;
  o.budget = std::max<int>(opts.budget, static_cast<int>(2 * d + 1));
  OptimizeResult r = direct_optimize([&](const VectorXd& z) { return objective(embed(z)); }, lo, hi, o);
  if (r.min < best.value) {
    best.value = r.min;
    NaturalSensitivity nat;
    best.arg = pull_back(embed(r.argmin), nat);
  }
  return best;
}

}  // namespace

BenchmarkResult benchmark_worst(const LinearizedEffect& lin, const BenchmarkMoments& bm, const BenchmarkSpec& spec,
                                const BenchmarkOptions& opts) {
  if (bm.r_m_cj.size() != lin.q) throw Error(ErrorCode::DimensionMismatch, "benchmark and effect disagree on q");
  BenchmarkResult res;
  WorstSearch est = search_worst(lin, bm, spec, opts, false);
  WorstSearch t = search_worst(lin, bm, spec, opts, true);
  res.worst_estimate = lin.orientation * est.value;
  res.worst_t = lin.orientation * t.value;
  res.argmin_estimate = est.arg;
  res.argmin_t = t.arg;
  res.natural_at_worst_t = natural_from_benchmark(bm, t.arg);
  return res;
}

std::optional<double> critical_delta(const LinearizedEffect& lin, const BenchmarkMoments& bm, double threshold,
                                     const std::vector<double>& delta_grid, bool pin_exposure,
                                     const BenchmarkOptions& opts) {
  if (lin.observed_t() <= threshold) return 0.0;
  for (std::size_t i = 0; i < delta_grid.size(); ++i) {
    if (!(delta_grid[i] > 0.0) || (i > 0 && !(delta_grid[i] > delta_grid[i - 1])))
      throw Error(ErrorCode::InvalidArgument, "delta grid must be positive and strictly increasing");
  }
  for (double delta : delta_grid) {
    BenchmarkSpec spec{bm.j, pin_exposure ? 0.0 : delta, delta, delta, {}};
    if (search_worst(lin, bm, spec, opts, true).value <= threshold) return delta;
  }
  return std::nullopt;
}

std::vector<double> default_delta_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 100; ++k) g.push_back(0.1 * k);
  return g;
}

}  // namespace medsens

namespace medsens {

std::vector<DeltaPoint> benchmark_delta_curve(const LinearizedEffect& lin, const BenchmarkMoments& bm,
                                              const std::vector<double>& delta_grid, bool pin_exposure,
                                              const BenchmarkOptions& opts) {
  std::vector<DeltaPoint> out(delta_grid.size());
  for (std::size_t i = 0; i < delta_grid.size(); ++i) {
    if (!(delta_grid[i] > 0.0) || (i > 0 && !(delta_grid[i] > delta_grid[i - 1])))
      throw Error(ErrorCode::InvalidArgument, "delta grid must be positive and strictly increasing");
  }
  parallel_for(delta_grid.size(), 0, [&](std::size_t i) {
    const double d = delta_grid[i];
    BenchmarkSpec spec{bm.j, pin_exposure ? 0.0 : d, d, d, {}};
    out[i] = {d, benchmark_worst(lin, bm, spec, opts)};
  });
  return out;
}

std::optional<double> critical_delta_from_curve(const LinearizedEffect& lin, const std::vector<DeltaPoint>& curve,
                                                double threshold) {
  if (lin.observed_t() <= threshold) return 0.0;
  double running = lin.observed_t();
  for (const auto& pt : curve) {
    running = std::min(running, lin.orientation * pt.result.worst_t);
    if (running <= threshold) return pt.delta;
  }
  return std::nullopt;
}

}  // namespace medsens
