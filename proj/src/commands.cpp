#include "medsens/commands.hpp"

#include <cmath>
#include <sstream>

#include "medsens/benchmarking.hpp"
#include "medsens/error.hpp"
#include "medsens/report.hpp"

namespace medsens {

using nlohmann::ordered_json;

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

ordered_json optional_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

MediationData load(const RunConfig& cfg) {
  if (cfg.data_path.empty()) throw Error(ErrorCode::InvalidArgument, "data: no input file given");
  return data_from_table(read_csv(cfg.data_path), cfg.roles);
}

BootstrapPlan make_plan(const MediationData& data, const RunConfig& cfg) {
  if (cfg.bootstrap < 2) throw Error(ErrorCode::InvalidArgument, "bootstrap: need at least 2 resamples");
  BootstrapOptions bo;
  bo.n_resamples = cfg.bootstrap;
  bo.seed = cfg.seed;
  bo.threads = cfg.threads;
  return bootstrap_moments(data, bo);
}

void check_open(double v, const char* field) {
  if (!(std::abs(v) < 1.0)) throw Error(ErrorCode::InvalidArgument, std::string(field) + ": must lie in (-1, 1)");
}

NaturalSensitivity sensitivity_from(const RunConfig& cfg, Eigen::Index q) {
  NaturalSensitivity s = NaturalSensitivity::zero(q);
  check_open(cfg.r_y, "ry");
  check_open(cfg.r_a, "ra");
  s.r_y = cfg.r_y;
  s.r_a = cfg.r_a;
  if (!cfg.r_m.empty()) {
    if (static_cast<Eigen::Index>(cfg.r_m.size()) != q)
      throw Error(ErrorCode::InvalidArgument, "rm: expected " + std::to_string(q) + " values, one per mediator");
    for (Eigen::Index i = 0; i < q; ++i) s.r_m(i) = cfg.r_m[static_cast<std::size_t>(i)];
    if (!(s.r_m.norm() < 1.0)) throw Error(ErrorCode::InvalidArgument, "rm: Euclidean norm must be below 1");
  }
  if (cfg.randomized && cfg.r_a != 0.0)
    throw Error(ErrorCode::InvalidArgument, "ra: must be 0 when the exposure is randomized");
  return s;
}

RVOptions rv_options(const RunConfig& cfg) {
  RVOptions ro;
  ro.search.budget = cfg.budget;
  ro.search.randomized = cfg.randomized;
  ro.search.mode = cfg.vector_u ? ConfounderMode::VectorU : ConfounderMode::ScalarU;
  ro.z = cfg.z;
  ro.threads = cfg.threads;
  return ro;
}

ordered_json observed_effect_json(const LinearizedEffect& lin) {
  VectorXd f0 = VectorXd::Zero(lin.point.size());
  f0(0) = 1.0;
  const double se = lin.std_err(f0);
  return ordered_json{{"estimate", lin.observed_estimate()},
                      {"std_err", se},
                      {"t_stat", se > 0.0 ? ordered_json(lin.observed_estimate() / se) : ordered_json(nullptr)}};
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec, const char* field) {
  auto parts = split_list(spec, ':');
  auto bad = [&] {
    return Error(ErrorCode::InvalidArgument, std::string(field) + ": expected lo:hi:step with 0 < lo <= hi, step > 0");
  };
  if (parts.size() != 3) throw bad();
  double lo, hi, step;
  try {
    lo = std::stod(parts[0]);
    hi = std::stod(parts[1]);
    step = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw bad();
  }
  if (!(lo > 0.0 && hi >= lo && step > 0.0)) throw bad();
  std::vector<double> g;
  for (long k = 0;; ++k) {
    const double v = std::round((lo + k * step) * 1e9) / 1e9;
    if (v > hi + 1e-9) break;
    g.push_back(v);
    if (g.size() > 100000) throw bad();
  }
  return g;
}

ordered_json config_json(const RunConfig& cfg, const std::string& command) {
  ordered_json j;
  j["command"] = command;
  j["data"] = cfg.data_path;
  j["outcome"] = cfg.roles.outcome;
  j["exposure"] = cfg.roles.exposure;
  j["mediators"] = cfg.roles.mediators;
  j["covariates"] = cfg.roles.covariates;
  j["bootstrap"] = cfg.bootstrap;
  j["seed"] = cfg.seed;
  j["z"] = cfg.z;
  j["randomized"] = cfg.randomized;
  if (command == "effects") {
    j["ry"] = cfg.r_y;
    j["rm"] = cfg.r_m;
    j["ra"] = cfg.r_a;
    j["classical"] = cfg.classical;
  } else if (command == "rv") {
    j["vector_u"] = cfg.vector_u;
    j["rho_grid"] = cfg.rho_grid;
    j["budget"] = cfg.budget;
  } else if (command == "benchmark") {
    j["j"] = cfg.benchmark_covariate;
    j["ka"] = cfg.randomized ? 0.0 : cfg.k_a;
    j["km"] = cfg.k_m;
    j["ky"] = cfg.k_y;
    j["delta_grid"] = cfg.delta_grid;
    j["budget"] = cfg.budget;
  }
  return j;
}

ordered_json cmd_effects(const RunConfig& cfg) {
  const MediationData data = load(cfg);
  const MediationMoments mm = fit_observed(data);
  const NaturalSensitivity s = sensitivity_from(cfg, data.q());
  const BootstrapPlan plan = make_plan(data, cfg);

  std::function<double(const MediationMoments&)> direct, indirect, difference;
  if (cfg.randomized) {
    direct = [&](const MediationMoments& m) { return direct_randomized(m, s.r_y, s.r_m); };
    indirect = [&](const MediationMoments& m) { return indirect_randomized(m, s.r_y, s.r_m); };
  } else {
    direct = [&](const MediationMoments& m) { return direct_adjusted(m, s); };
    indirect = [&](const MediationMoments& m) { return indirect_adjusted_product(m, s); };
  }
  difference = [&](const MediationMoments& m) { return indirect_adjusted_difference(m, s); };

  ordered_json out;
  out["schema_version"] = kSchemaVersion;
  out["config"] = config_json(cfg, "effects");
  out["seed"] = cfg.seed;
  out["observed"] = observed_json(mm);
  out["sensitivity"] = to_json(s);
  out["implied"] = {{"r_a_u_mc", r_aumc_from_natural(mm, s)}, {"r_y_u_ac", r_yuac_from_natural(mm, s)}};

  BootstrapSummary bs;
  EffectReport d = bootstrap_report(mm, plan, direct, EffectKind::Direct, EffectMethod::Plugin, cfg.z, &bs);
  out["direct"] = to_json(d);
  out["direct"]["bootstrap"] = to_json(bs);
  EffectReport ip = bootstrap_report(mm, plan, indirect, EffectKind::Indirect, EffectMethod::Product, cfg.z, &bs);
  out["indirect"] = to_json(ip);
  out["indirect"]["bootstrap"] = to_json(bs);
  EffectReport id = bootstrap_report(mm, plan, difference, EffectKind::Indirect, EffectMethod::Difference, cfg.z, &bs);
  out["indirect_difference"] = to_json(id);
  out["indirect_difference"]["bootstrap"] = to_json(bs);

  if (cfg.classical) {
    if (data.q() != 1) throw Error(ErrorCode::InvalidArgument, "classical: needs exactly one mediator");
    R2Sensitivity r2{s.r_y * s.r_y, s.r_m.squaredNorm(), s.r_a * s.r_a};
    out["sample_classical"] = {{"direct", to_json(direct_sample_classical(mm, r2))},
                               {"indirect", to_json(indirect_sample_classical(mm, r2))}};
  }
  out["bootstrap"] = {{"resamples", plan.n_resamples}, {"redraws", plan.redraws}};
  return out;
}

RvOutput cmd_rv(const RunConfig& cfg) {
  const std::vector<double> grid = parse_grid(cfg.rho_grid, "rho-grid");
  for (double r : grid)
    if (!(r < 1.0)) throw Error(ErrorCode::InvalidArgument, "rho-grid: values must be below 1");
  const MediationData data = load(cfg);
  const MediationMoments mm = fit_observed(data);
  const BootstrapPlan plan = make_plan(data, cfg);
  const RVOptions ro = rv_options(cfg);

  const LinearizedEffect lin_d = linearize(mm, plan, EffectKind::Direct);
  const LinearizedEffect lin_i = linearize(mm, plan, EffectKind::Indirect);
  const RVReport rd = robustness_value(lin_d, grid, ro);
  const RVReport ri = robustness_value(lin_i, grid, ro);

  RvOutput out;
  out.report["schema_version"] = kSchemaVersion;
  out.report["config"] = config_json(cfg, "rv");
  out.report["seed"] = cfg.seed;
  out.report["observed"] = observed_json(mm);
  ordered_json jd = observed_effect_json(lin_d);
  jd.update(to_json(rd));
  ordered_json ji = observed_effect_json(lin_i);
  ji.update(to_json(ri));
  out.report["direct"] = jd;
  out.report["indirect"] = ji;
  out.curve_csv = curve_csv(rd, ri);
  return out;
}

BenchmarkOutput cmd_benchmark(const RunConfig& cfg) {
  const MediationData data = load(cfg);
  if (data.covariate_labels.empty())
    throw Error(ErrorCode::InvalidArgument, "covariates: benchmarking needs at least one covariate");
  const std::vector<double> deltas = parse_grid(cfg.delta_grid, "delta-grid");
  for (double k : {cfg.k_a, cfg.k_m, cfg.k_y})
    if (!(k >= 0.0) || !std::isfinite(k)) throw Error(ErrorCode::InvalidArgument, "ka/km/ky: caps must be finite and >= 0");
  Eigen::Index chosen = -1;
  if (!cfg.benchmark_covariate.empty()) {
    for (std::size_t i = 0; i < data.covariate_labels.size(); ++i)
      if (data.covariate_labels[i] == cfg.benchmark_covariate) chosen = static_cast<Eigen::Index>(i);
    if (chosen < 0) throw Error(ErrorCode::InvalidArgument, "j: '" + cfg.benchmark_covariate + "' is not a covariate");
  }

  const MediationMoments mm = fit_observed(data);
  const BootstrapPlan plan = make_plan(data, cfg);
  const LinearizedEffect lin_d = linearize(mm, plan, EffectKind::Direct);
  const LinearizedEffect lin_i = linearize(mm, plan, EffectKind::Indirect);
  BenchmarkOptions bo;
  bo.budget = cfg.budget;
  const double k_a = cfg.randomized ? 0.0 : cfg.k_a;

  BenchmarkOutput out;
  out.report["schema_version"] = kSchemaVersion;
  out.report["config"] = config_json(cfg, "benchmark");
  out.report["seed"] = cfg.seed;
  out.report["observed"] = observed_json(mm);
  out.report["direct_observed"] = observed_effect_json(lin_d);
  out.report["indirect_observed"] = observed_effect_json(lin_i);

  std::ostringstream bars;
  bars << "covariate,effect,worst_estimate,worst_t\n";
  ordered_json rows = ordered_json::array();
  double max_r2_y = 0.0, max_r2_m = 0.0;
  std::vector<BenchmarkMoments> bms;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(data.covariate_labels.size()); ++j) {
    BenchmarkMoments bm = benchmark_moments(data, j);
    max_r2_y = std::max(max_r2_y, bm.r2_y());
    max_r2_m = std::max(max_r2_m, bm.r2_m());
    BenchmarkSpec spec{j, k_a, cfg.k_m, cfg.k_y, {}};
    BenchmarkResult rd = benchmark_worst(lin_d, bm, spec, bo);
    BenchmarkResult ri = benchmark_worst(lin_i, bm, spec, bo);
    ordered_json row;
    row["covariate"] = bm.label;
    row["anchors"] = {{"r2_a_cj", bm.r2_a()}, {"r2_m_cj", bm.r2_m()}, {"r2_y_cj", bm.r2_y()}};
    row["direct"] = {{"worst_estimate", rd.worst_estimate}, {"worst_t", rd.worst_t},
                     {"argmin_t", to_json(rd.argmin_t)}, {"natural_at_worst_t", to_json(rd.natural_at_worst_t)}};
    row["indirect"] = {{"worst_estimate", ri.worst_estimate}, {"worst_t", ri.worst_t},
                       {"argmin_t", to_json(ri.argmin_t)}, {"natural_at_worst_t", to_json(ri.natural_at_worst_t)}};
    rows.push_back(row);
    bars << bm.label << ",direct," << fmt(rd.worst_estimate) << ',' << fmt(rd.worst_t) << '\n';
    bars << bm.label << ",indirect," << fmt(ri.worst_estimate) << ',' << fmt(ri.worst_t) << '\n';
    bms.push_back(std::move(bm));
  }
  out.report["reference_r2"] = {{"max_r2_y_cj", max_r2_y}, {"max_r2_m_cj", max_r2_m}};
  out.report["covariates"] = rows;
  out.bars_csv = bars.str();

  if (chosen >= 0) {
    const BenchmarkMoments& bm = bms[static_cast<std::size_t>(chosen)];
    auto cd = benchmark_delta_curve(lin_d, bm, deltas, cfg.randomized, bo);
    auto ci = benchmark_delta_curve(lin_i, bm, deltas, cfg.randomized, bo);
    out.report["critical_delta"] = {
        {"covariate", bm.label},
        {"direct", {{"estimate", optional_json(critical_delta_from_curve(lin_d, cd, 0.0))},
                    {"ci", optional_json(critical_delta_from_curve(lin_d, cd, cfg.z))}}},
        {"indirect", {{"estimate", optional_json(critical_delta_from_curve(lin_i, ci, 0.0))},
                      {"ci", optional_json(critical_delta_from_curve(lin_i, ci, cfg.z))}}}};
    std::ostringstream dc;
    dc << "delta,worst_estimate_direct,worst_t_direct,worst_estimate_indirect,worst_t_indirect\n";
    for (std::size_t i = 0; i < deltas.size(); ++i)
      dc << fmt(deltas[i]) << ',' << fmt(cd[i].result.worst_estimate) << ',' << fmt(cd[i].result.worst_t) << ','
         << fmt(ci[i].result.worst_estimate) << ',' << fmt(ci[i].result.worst_t) << '\n';
    out.delta_csv = dc.str();
  }
  return out;
}

std::string cmd_simulate(const RunConfig& cfg) {
  if (cfg.n < 8) throw Error(ErrorCode::InvalidArgument, "n: too small for the simulation design");
  std::vector<S4Design> designs;
  for (int d : cfg.dims) {
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "dim-m: must be positive");
    for (double ra : cfg.r2_a_m)
      for (double ry : cfg.r2_y_m) {
        if (!(ra > 0.0 && ra < 1.0 && ry > 0.0 && ry < 1.0))
          throw Error(ErrorCode::InvalidArgument, "r2-am/r2-ym: targets must lie in (0, 1)");
        designs.push_back({d, ra, ry, cfg.n, cfg.seed});
      }
  }
  StudyOptions so;
  so.replications = cfg.replications;
  so.bootstrap = cfg.bootstrap;
  so.budget = cfg.budget;
  so.seed = cfg.seed;
  so.threads = cfg.threads;
  return study_csv(rv_ratio_study(designs, so));
}

}  // namespace medsens
