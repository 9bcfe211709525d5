#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "medsens/dataset.hpp"

namespace medsens {

struct RunConfig {
  std::string data_path;
  ColumnRoles roles;
  double r_y = 0.0;
  std::vector<double> r_m;
  double r_a = 0.0;
  bool randomized = false;
  bool vector_u = false;
  bool classical = false;
  std::string rho_grid = "0.01:0.99:0.01";
  int bootstrap = 1000;
  std::uint64_t seed = 20240601;
  unsigned threads = 0;
  int budget = 4000;
  double z = 1.96;
  std::string benchmark_covariate;
  double k_a = 1.0, k_m = 1.0, k_y = 1.0;
  std::string delta_grid = "0.1:10:0.1";
  // simulate
  std::vector<int> dims = {2};
  std::vector<double> r2_a_m = {0.3};
  std::vector<double> r2_y_m = {0.3};
  long n = 500;
  int replications = 20;
};

// lo:hi:step with lo > 0; values are rounded to 1e-9 so they print as typed.
std::vector<double> parse_grid(const std::string& spec, const char* field);

nlohmann::ordered_json config_json(const RunConfig& cfg, const std::string& command);

nlohmann::ordered_json cmd_effects(const RunConfig& cfg);

struct RvOutput {
  nlohmann::ordered_json report;
  std::string curve_csv;
};
RvOutput cmd_rv(const RunConfig& cfg);

struct BenchmarkOutput {
  nlohmann::ordered_json report;
  std::string bars_csv;
  std::string delta_csv;
};
BenchmarkOutput cmd_benchmark(const RunConfig& cfg);

std::string cmd_simulate(const RunConfig& cfg);

}  // namespace medsens
