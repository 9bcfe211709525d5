#include <numeric>

#include "medsens/error.hpp"
#include "medsens/inference.hpp"
#include "medsens/oracle.hpp"
#include "medsens/robustness.hpp"

namespace medsens {

namespace {

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<StudyRow> rv_ratio_study(const std::vector<S4Design>& designs, const StudyOptions& opts) {
  if (opts.replications < 1) throw Error(ErrorCode::InvalidArgument, "need at least one replication");
  std::vector<StudyRow> rows;
  const std::vector<double> grid = default_rho_grid();
  for (std::size_t d = 0; d < designs.size(); ++d) {
    StudyRow row;
    row.design = designs[d];
    const auto reps = static_cast<std::size_t>(opts.replications);
    row.rv_scalar.assign(reps, 0.0);
    row.rv_vector.assign(reps, 0.0);
    row.rv_ci_scalar.assign(reps, 0.0);
    row.rv_ci_vector.assign(reps, 0.0);
    parallel_for(reps, opts.threads, [&](std::size_t r) {
      S4Design rep = designs[d];
      rep.seed = designs[d].seed * 1000003ULL + r;
      MediationData data = simulate_s4(rep);
      MediationMoments mm = fit_observed(data);
      BootstrapOptions bo;
      bo.n_resamples = opts.bootstrap;
      bo.seed = opts.seed + 7919ULL * d + r;
      bo.threads = 1;
      BootstrapPlan plan = bootstrap_moments(data, bo);
      LinearizedEffect lin = linearize(mm, plan, EffectKind::Indirect);
      RVOptions ro;
      ro.early_stop = true;
      ro.search.budget = opts.budget;
      ro.search.mode = ConfounderMode::ScalarU;
      RVReport s = robustness_value(lin, grid, ro);
      ro.search.mode = ConfounderMode::VectorU;
      RVReport v = robustness_value(lin, grid, ro);
      row.rv_scalar[r] = s.rv_estimate;
      row.rv_vector[r] = v.rv_estimate;
      row.rv_ci_scalar[r] = s.rv_ci;
      row.rv_ci_vector[r] = v.rv_ci;
    });
    row.mean_scalar = mean(row.rv_scalar);
    row.mean_vector = mean(row.rv_vector);
    row.mean_ci_scalar = mean(row.rv_ci_scalar);
    row.mean_ci_vector = mean(row.rv_ci_vector);
    row.ratio = row.mean_scalar > 0.0 ? row.mean_vector / row.mean_scalar : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace medsens
