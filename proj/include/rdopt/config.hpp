#pragma once

#include <cstdint>
#include <limits>
#include <string>

namespace rdopt {

/// Everything one run needs, serializable to a sectioned key = value file.
/// Unknown keys are rejected on parse.
struct RunConfig {
  // [dataset]
  bool synthetic = true;
  std::string dataset_path;  // empty -> "<out>/samples.csv"
  std::uint64_t seed = 42;
  int n_boundary = 20;
  int n_interior = 80;

  // [gpr]
  double alpha = 1e-12;
  std::string hyperparameters = "auto";  // "auto" (max likelihood) or "fixed"
  double sigma_f = 1.0;
  double l = 0.5;

  // [uncertainty]
  double ex = 0.05;

  // [pce]
  int order = 3;

  // [problem]
  int problem = 1;
  double omega = 0.5;
  double sigma1_bound = std::numeric_limits<double>::infinity();
  double sigma2_bound = std::numeric_limits<double>::infinity();
  double bound = std::numeric_limits<double>::infinity();
  double k_sigma = 2.0;
  int pareto_points = 21;
  double bound_min = 0.22;
  double bound_max = 0.5;
  int bound_count = 8;

  // [output]
  std::string out_dir = "out";
  int grid_n1 = 100;
  int grid_n2 = 100;
  std::string domain = "unit";  // "unit" = [0,1]^2, "extended" = [-0.1,1.1]^2

  std::string resolved_dataset_path() const;
};

RunConfig parse_config_file(const std::string& path);  // throws ParseError
std::string serialize_config(const RunConfig& config);
void write_config_file(const std::string& path, const RunConfig& config);

}  // namespace rdopt
