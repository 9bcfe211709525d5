#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "medsens/commands.hpp"
#include "medsens/error.hpp"

namespace {

using medsens::RunConfig;

void add_data_options(CLI::App* cmd, RunConfig& cfg, std::string& mediators, std::string& covariates) {
  cmd->add_option("--data", cfg.data_path, "CSV file with a header row")->required();
  cmd->add_option("--outcome", cfg.roles.outcome, "outcome column")->required();
  cmd->add_option("--exposure", cfg.roles.exposure, "exposure column")->required();
  cmd->add_option("--mediators", mediators, "comma-separated mediator columns")->required();
  cmd->add_option("--covariates", covariates, "comma-separated covariate columns (intercept is added)");
  cmd->add_option("--bootstrap", cfg.bootstrap, "bootstrap resamples")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "bootstrap seed")->capture_default_str();
  cmd->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
  cmd->add_option("--z", cfg.z, "normal critical value")->capture_default_str();
  cmd->add_flag("--randomized", cfg.randomized, "exposure is randomized (R_{a~u|c} = 0)");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw medsens::Error(medsens::ErrorCode::InvalidArgument, "out: cannot write '" + path + "'");
  f << text;
}

std::string sibling(const std::string& out, const std::string& suffix) {
  if (out.empty() || out == "-") return "";
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensitivity analysis of Baron-Kenny mediation to unmeasured confounding"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string mediators, covariates, out, curve_out, bars_out, delta_out, rm;

  auto* effects = app.add_subcommand("effects", "bias-adjusted direct and indirect effects");
  add_data_options(effects, cfg, mediators, covariates);
  effects->add_option("--ry", cfg.r_y, "R_{y~u|a,m,c}");
  effects->add_option("--rm", rm, "R_{m~u|a,c}, comma-separated");
  effects->add_option("--ra", cfg.r_a, "R_{a~u|c}");
  effects->add_flag("--classical", cfg.classical, "also report the classical-SE variant (one mediator)");
  effects->add_option("--out", out, "JSON output path (default stdout)");

  auto* rv = app.add_subcommand("rv", "robustness values and min-t curves");
  add_data_options(rv, cfg, mediators, covariates);
  rv->add_flag("--vector-u", cfg.vector_u, "allow a vector confounder");
  rv->add_option("--rho-grid", cfg.rho_grid, "lo:hi:step")->capture_default_str();
  rv->add_option("--budget", cfg.budget, "optimizer evaluations per rho")->capture_default_str();
  rv->add_option("--out", out, "JSON output path (default stdout)");
  rv->add_option("--curve", curve_out, "curve CSV path (default <out>_curve.csv)");

  auto* bench = app.add_subcommand("benchmark", "formal benchmarking against observed covariates");
  add_data_options(bench, cfg, mediators, covariates);
  bench->add_option("--j", cfg.benchmark_covariate, "covariate for the critical-delta search");
  bench->add_option("--ka", cfg.k_a, "cap on k_a")->capture_default_str();
  bench->add_option("--km", cfg.k_m, "cap on k_m")->capture_default_str();
  bench->add_option("--ky", cfg.k_y, "cap on k_y")->capture_default_str();
  bench->add_option("--delta-grid", cfg.delta_grid, "lo:hi:step")->capture_default_str();
  bench->add_option("--budget", cfg.budget, "optimizer evaluations per search")->capture_default_str();
  bench->add_option("--out", out, "JSON output path (default stdout)");
  bench->add_option("--bars", bars_out, "per-covariate CSV path (default <out>_bars.csv)");
  bench->add_option("--delta-curve", delta_out, "delta curve CSV path (default <out>_delta.csv)");

  auto* sim = app.add_subcommand("simulate", "scalar versus vector confounder robustness values on simulated data");
  sim->add_option("--dim-m", cfg.dims, "mediator dimensions")->delimiter(',');
  sim->add_option("--r2-am", cfg.r2_a_m, "R^2 targets for a on m")->delimiter(',');
  sim->add_option("--r2-ym", cfg.r2_y_m, "R^2 targets for y on m given a")->delimiter(',');
  sim->add_option("--n", cfg.n, "sample size")->capture_default_str();
  sim->add_option("--replications", cfg.replications, "replications per cell")->capture_default_str();
  sim->add_option("--bootstrap", cfg.bootstrap, "bootstrap resamples")->capture_default_str();
  sim->add_option("--seed", cfg.seed, "seed")->capture_default_str();
  sim->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
  sim->add_option("--budget", cfg.budget, "optimizer evaluations per rho")->capture_default_str();
  sim->add_option("--out", out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    cfg.roles.mediators = medsens::split_list(mediators);
    cfg.roles.covariates = medsens::split_list(covariates);
    if (!rm.empty())
      for (const auto& v : medsens::split_list(rm)) {
        try {
          cfg.r_m.push_back(std::stod(v));
        } catch (const std::exception&) {
          throw medsens::Error(medsens::ErrorCode::InvalidArgument, "rm: '" + v + "' is not a number");
        }
      }

    if (*effects) {
      write_text(out, medsens::cmd_effects(cfg).dump(2) + "\n");
    } else if (*rv) {
      auto r = medsens::cmd_rv(cfg);
      write_text(out, r.report.dump(2) + "\n");
      const std::string cpath = curve_out.empty() ? sibling(out, "_curve.csv") : curve_out;
      if (!cpath.empty()) write_text(cpath, r.curve_csv);
    } else if (*bench) {
      auto r = medsens::cmd_benchmark(cfg);
      write_text(out, r.report.dump(2) + "\n");
      const std::string bpath = bars_out.empty() ? sibling(out, "_bars.csv") : bars_out;
      if (!bpath.empty()) write_text(bpath, r.bars_csv);
      const std::string dpath = delta_out.empty() ? sibling(out, "_delta.csv") : delta_out;
      if (!dpath.empty() && !r.delta_csv.empty()) write_text(dpath, r.delta_csv);
    } else if (*sim) {
      write_text(out, medsens::cmd_simulate(cfg));
    }
  } catch (const medsens::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return medsens::is_input_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
