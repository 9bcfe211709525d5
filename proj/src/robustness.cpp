#include "medsens/robustness.hpp"

#include <cmath>
#include <limits>

#include "medsens/error.hpp"

namespace medsens {

namespace {

constexpr double kClamp = (1.0 - 1e-9) * (1.0 - 1e-9);
constexpr double kPi = 3.14159265358979323846;

VectorXd sphere_point(const double* angles, Eigen::Index q) {
  VectorXd x(q);
  double s = 1.0;
  for (Eigen::Index i = 0; i + 1 < q; ++i) {
    x(i) = s * std::cos(angles[i]);
    s *= std::sin(angles[i]);
  }
  x(q - 1) = s;
  return x;
}

// Appends box bounds for q-1 spherical angles.
void push_angles(std::vector<double>& lo, std::vector<double>& hi, Eigen::Index q) {
  for (Eigen::Index i = 0; i + 1 < q; ++i) {
    lo.push_back(0.0);
    hi.push_back(i + 2 < q ? kPi : 2.0 * kPi);
  }
}

// Ball of the given radius: a signed scalar for q = 1, else radius plus angles.
void push_ball(std::vector<double>& lo, std::vector<double>& hi, Eigen::Index q, double radius) {
  if (q == 1) {
    lo.push_back(-radius);
    hi.push_back(radius);
    return;
  }
  lo.push_back(0.0);
  hi.push_back(radius);
  push_angles(lo, hi, q);
}

VectorXd read_ball(const VectorXd& x, Eigen::Index& at, Eigen::Index q) {
  if (q == 1) return VectorXd::Constant(1, x(at++));
  const double r = x(at++);
  VectorXd v = r * sphere_point(x.data() + at, q);
  at += q - 1;
  return v;
}

VectorXd to_vec(const std::vector<double>& v) { return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }

// Minimizes f over the box, removing coordinates whose bounds coincide.
OptimizeResult optimize_box(const std::function<double(const VectorXd&)>& f, const VectorXd& lower,
                            const VectorXd& upper, int budget) {
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < lower.size(); ++i)
    if (upper(i) > lower(i)) free.push_back(i);
  if (free.empty()) {
    OptimizeResult r;
    r.argmin = lower;
    r.min = f(lower);
    r.evaluations = 1;
    return r;
  }
  const auto d = static_cast<Eigen::Index>(free.size());
  VectorXd lo(d), hi(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    lo(k) = lower(free[k]);
    hi(k) = upper(free[k]);
  }
  VectorXd full = lower;
  auto reduced = [&](const VectorXd& z) {
    VectorXd x = full;
    for (Eigen::Index k = 0; k < d; ++k) x(free[k]) = z(k);
    return f(x);
  };
  DirectOptions o;
  o.budget = std::max<int>(budget, static_cast<int>(2 * d + 1));
  OptimizeResult r = direct_optimize(reduced, lo, hi, o);
  VectorXd x = full;
  for (Eigen::Index k = 0; k < d; ++k) x(free[k]) = r.argmin(k);
  r.argmin = x;
  return r;
}

void check_rho(const RhoBudget& rho) {
  for (double v : {rho.rho_y, rho.rho_m, rho.rho_a})
    if (!(v >= 0.0 && v < 1.0)) throw Error(ErrorCode::InvalidArgument, "rho must lie in [0, 1)");
}

}  // namespace

const char* to_string(ConfounderMode m) { return m == ConfounderMode::ScalarU ? "scalar_u" : "vector_u"; }

double LinearizedEffect::std_err(const VectorXd& f) const { return std::sqrt(std::max(f.dot(cov * f), 0.0)); }

double LinearizedEffect::oriented_t(const VectorXd& f) const {
  const double est = orientation * estimate(f);
  const double se = std_err(f);
  if (se > 0.0) return est / se;
  if (est == 0.0) return 0.0;
  return est > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

double LinearizedEffect::observed_t() const {
  VectorXd f = VectorXd::Zero(point.size());
  f(0) = 1.0;
  return oriented_t(f);
}

PhiDirect phi_direct_from_natural(const NaturalSensitivity& s) {
  const double root_m = std::sqrt(1.0 - s.r_m.squaredNorm());
  PhiDirect phi;
  phi.phi1 = s.r_y * s.r_a / (std::sqrt(1.0 - s.r_a * s.r_a) * root_m);
  phi.phi2 = s.r_y * s.r_m / root_m;
  return phi;
}

PhiIndirect phi_indirect_from_natural(const NaturalSensitivity& s) {
  PhiIndirect phi;
  phi.phi_beta = odds(s.r_a) * s.r_m;
  phi.phi_theta = s.r_y * s.r_m / std::sqrt(1.0 - s.r_m.squaredNorm());
  return phi;
}

VectorXd direct_features(const PhiDirect& phi) {
  const Eigen::Index q = phi.phi2.size();
  VectorXd f(q + 2);
  f(0) = 1.0;
  f(1) = phi.phi1;
  f.tail(q) = phi.phi2;
  return f;
}

VectorXd indirect_features(const PhiIndirect& phi) {
  const Eigen::Index q = phi.phi_beta.size();
  VectorXd f((q + 1) * (q + 1));
  f(0) = 1.0;
  f.segment(1, q) = phi.phi_beta;
  f.segment(1 + q, q) = phi.phi_theta;
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index j = 0; j < q; ++j) f(1 + 2 * q + i * q + j) = phi.phi_theta(i) * phi.phi_beta(j);
  return f;
}

VectorXd direct_coefficients(const MediationMoments& mm) {
  const Eigen::Index q = mm.q;
  const double root_r = std::sqrt(1.0 - mm.r_m_a_c.squaredNorm());
  const double scale = std::sqrt(mm.var_y_res_amc / mm.var_a_res_mc);
  VectorXd g(q + 2);
  g(0) = mm.theta1_obs;
  g(1) = -root_r * scale;
  g.tail(q) = scale / root_r * (mm.m_shrink.transpose() * mm.r_m_a_c);
  return g;
}

VectorXd indirect_coefficients(const MediationMoments& mm) {
  const Eigen::Index q = mm.q;
  const MatrixXd t_beta = -mm.sqrt_cov_m_ac / std::sqrt(mm.var_a_res_c);
  const MatrixXd t_theta = -std::sqrt(mm.var_y_res_amc) * mm.inv_sqrt_cov_m_ac;
  const MatrixXd cross = t_theta.transpose() * t_beta;
  VectorXd g((q + 1) * (q + 1));
  g(0) = mm.theta3_obs.dot(mm.beta1_obs);
  g.segment(1, q) = t_beta.transpose() * mm.theta3_obs;
  g.segment(1 + q, q) = t_theta.transpose() * mm.beta1_obs;
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index j = 0; j < q; ++j) g(1 + 2 * q + i * q + j) = cross(i, j);
  return g;
}

LinearizedEffect linearize(const MediationMoments& mm, const BootstrapPlan& plan, EffectKind kind) {
  auto coef = [kind](const MediationMoments& m) {
    return kind == EffectKind::Direct ? direct_coefficients(m) : indirect_coefficients(m);
  };
  LinearizedEffect lin;
  lin.kind = kind;
  lin.q = mm.q;
  lin.point = coef(mm);
  const std::size_t b = plan.resample_moments.size();
  const Eigen::Index k = lin.point.size();
  MatrixXd g(k, static_cast<Eigen::Index>(b));
  for (std::size_t i = 0; i < b; ++i) {
    if (plan.resample_moments[i].q != mm.q)
      throw Error(ErrorCode::DimensionMismatch, "resample moments disagree with the data on q");
    g.col(static_cast<Eigen::Index>(i)) = coef(plan.resample_moments[i]);
  }
  lin.cov = MatrixXd::Zero(k, k);
  if (b >= 2) {
    VectorXd mean = g.rowwise().mean();
    MatrixXd centered = g.colwise() - mean;
    lin.cov = centered * centered.transpose() / static_cast<double>(b - 1);
  }
  lin.orientation = lin.point(0) < 0.0 ? -1.0 : 1.0;
  return lin;
}

double adjusted_estimate(const LinearizedEffect& lin, const NaturalSensitivity& s) {
  VectorXd f = lin.kind == EffectKind::Direct ? direct_features(phi_direct_from_natural(s))
                                              : indirect_features(phi_indirect_from_natural(s));
  return lin.estimate(f);
}

double adjusted_t(const LinearizedEffect& lin, const NaturalSensitivity& s) {
  VectorXd f = lin.kind == EffectKind::Direct ? direct_features(phi_direct_from_natural(s))
                                              : indirect_features(phi_indirect_from_natural(s));
  return lin.orientation * lin.oriented_t(f);
}

PhiSearchSpace phi_search_space(EffectKind kind, Eigen::Index q, const RhoBudget& rho_in, const SearchOptions& opts) {
  check_rho(rho_in);
  const RhoBudget rho{rho_in.rho_y * kClamp, rho_in.rho_m * kClamp, rho_in.rho_a * kClamp};
  std::vector<double> lo, hi;
  PhiSearchSpace space;

  if (kind == EffectKind::Direct) {
    const double t3max = std::atan(std::sqrt(rho.rho_m / (1.0 - rho.rho_m)));
    const double root_y = std::sqrt(rho.rho_y);
    if (opts.randomized) {
      push_ball(lo, hi, q, root_y * std::tan(t3max));
      space.features = [q](const VectorXd& x) {
        Eigen::Index at = 0;
        PhiDirect phi{0.0, read_ball(x, at, q)};
        return direct_features(phi);
      };
    } else {
      const double amp1 = std::sqrt(rho.rho_y * rho.rho_a / (1.0 - rho.rho_a));
      lo.push_back(-1.0);
      hi.push_back(1.0);
      lo.push_back(q == 1 ? -t3max : 0.0);
      hi.push_back(t3max);
      push_angles(lo, hi, q);
      space.features = [q, amp1, root_y](const VectorXd& x) {
        const double t1 = x(0), t3 = x(1);
        PhiDirect phi;
        phi.phi1 = amp1 * t1 / std::cos(t3);
        phi.phi2 = root_y * std::tan(t3) * (q == 1 ? VectorXd::Ones(1) : sphere_point(x.data() + 2, q));
        return direct_features(phi);
      };
    }
  } else {
    const double amp_beta = std::sqrt(rho.rho_m * rho.rho_a / (1.0 - rho.rho_a));
    const double amp_theta = std::sqrt(rho.rho_y * rho.rho_m / (1.0 - rho.rho_m));
    if (opts.randomized) {
      push_ball(lo, hi, q, amp_theta);
      space.features = [q](const VectorXd& x) {
        Eigen::Index at = 0;
        PhiIndirect phi{VectorXd::Zero(q), read_ball(x, at, q)};
        return indirect_features(phi);
      };
    } else if (opts.mode == ConfounderMode::ScalarU || q == 1) {
      lo.insert(lo.end(), {-1.0, -1.0});
      hi.insert(hi.end(), {1.0, 1.0});
      push_angles(lo, hi, q);
      space.features = [q, amp_beta, amp_theta](const VectorXd& x) {
        const VectorXd dir = q == 1 ? VectorXd::Ones(1) : sphere_point(x.data() + 2, q);
        PhiIndirect phi{amp_beta * x(0) * dir, amp_theta * x(1) * dir};
        return indirect_features(phi);
      };
    } else {
      push_ball(lo, hi, q, amp_beta);
      push_ball(lo, hi, q, amp_theta);
      space.features = [q](const VectorXd& x) {
        Eigen::Index at = 0;
        PhiIndirect phi;
        phi.phi_beta = read_ball(x, at, q);
        phi.phi_theta = read_ball(x, at, q);
        return indirect_features(phi);
      };
    }
  }
  space.lower = to_vec(lo);
  space.upper = to_vec(hi);
  return space;
}

namespace {

MinTResult minimize(const LinearizedEffect& lin, const RhoBudget& rho, const SearchOptions& opts, bool use_t) {
  auto value = [&](const VectorXd& f) { return use_t ? lin.oriented_t(f) : lin.orientation * lin.estimate(f); };
  VectorXd f0 = VectorXd::Zero(lin.point.size());
  f0(0) = 1.0;
  MinTResult res{value(f0), f0};
  PhiSearchSpace space = phi_search_space(lin.kind, lin.q, rho, opts);
  OptimizeResult opt = optimize_box([&](const VectorXd& x) { return value(space.features(x)); }, space.lower,
                                    space.upper, opts.budget);
  if (opt.min < res.min_t) {
    res.min_t = opt.min;
    res.features = space.features(opt.argmin);
  }
  return res;
}

}  // namespace

MinTResult min_t(const LinearizedEffect& lin, const RhoBudget& rho, const SearchOptions& opts) {
  return minimize(lin, rho, opts, true);
}

MinTResult min_estimate(const LinearizedEffect& lin, const RhoBudget& rho, const SearchOptions& opts) {
  return minimize(lin, rho, opts, false);
}

double min_t_direct(const MediationMoments& mm, const BootstrapPlan& plan, double rho, ConfounderMode mode,
                    const SearchOptions& opts) {
  SearchOptions o = opts;
  o.mode = mode;
  return min_t(linearize(mm, plan, EffectKind::Direct), RhoBudget::common(rho), o).min_t;
}

double min_t_indirect(const MediationMoments& mm, const BootstrapPlan& plan, double rho, ConfounderMode mode,
                      const SearchOptions& opts) {
  SearchOptions o = opts;
  o.mode = mode;
  return min_t(linearize(mm, plan, EffectKind::Indirect), RhoBudget::common(rho), o).min_t;
}

std::vector<double> default_rho_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 99; ++k) g.push_back(k / 100.0);
  return g;
}

double rv_from_curve(const std::vector<std::pair<double, double>>& curve, double observed_t, double threshold) {
  if (observed_t <= threshold) return 0.0;
  for (const auto& [rho, t] : curve)
    if (t <= threshold) return rho;
  return 1.0;
}

RVReport robustness_value(const LinearizedEffect& lin, const std::vector<double>& rho_grid, const RVOptions& opts) {
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    if (!(rho_grid[i] > 0.0 && rho_grid[i] < 1.0))
      throw Error(ErrorCode::InvalidArgument, "rho grid values must lie in (0, 1)");
    if (i > 0 && !(rho_grid[i] > rho_grid[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "rho grid must be strictly increasing");
  }
  RVReport rep;
  rep.mode = opts.search.mode;
  rep.effect_kind = lin.kind;
  rep.sign_flipped = lin.orientation < 0.0;
  rep.observed_t = lin.observed_t();

  std::vector<double> mins(rho_grid.size(), 0.0);
  std::size_t done = rho_grid.size();
  if (opts.early_stop) {
    double running = rep.observed_t;
    for (std::size_t i = 0; i < rho_grid.size(); ++i) {
      mins[i] = min_t(lin, RhoBudget::common(rho_grid[i]), opts.search).min_t;
      running = std::min(running, mins[i]);
      if (running <= 0.0) {
        done = i + 1;
        break;
      }
    }
  } else {
    parallel_for(rho_grid.size(), opts.threads, [&](std::size_t i) {
      mins[i] = min_t(lin, RhoBudget::common(rho_grid[i]), opts.search).min_t;
    });
  }

  // Feasible sets are nested in rho, so the running minimum is still a valid min over the set.
  double running = rep.observed_t;
  for (std::size_t i = 0; i < done; ++i) {
    running = std::min(running, mins[i]);
    rep.curve.emplace_back(rho_grid[i], running);
  }
  rep.rv_estimate = rv_from_curve(rep.curve, rep.observed_t, 0.0);
  rep.rv_ci = rv_from_curve(rep.curve, rep.observed_t, opts.z);
  return rep;
}

RVReport robustness_value(const MediationMoments& mm, const BootstrapPlan& plan, EffectKind kind,
                          const std::vector<double>& rho_grid, const RVOptions& opts) {
  return robustness_value(linearize(mm, plan, kind), rho_grid, opts);
}

}  // namespace medsens
