#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "hiercal/metrics.hpp"

namespace hiercal {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TestbedConfig {
  int n = 10;
  // noise std per observed output (broadcast when a single value is given)
  std::vector<double> sigma_eps = {0.09, 0.09, 0.03};
  double delta_v = 0.1;
  Eigen::VectorXd lambda0;          // empty: canonical default
  std::vector<int> t_obs = {1, 2, 3};  // 1-based observed outputs to study
  std::uint64_t design_seed = 17;
  std::uint64_t noise_seed = 29;
  std::vector<std::uint64_t> design_seeds;  // multi-design mode; empty: {design_seed}

  double sigma_for(int t_obs_1based) const;
  std::vector<std::uint64_t> effective_design_seeds() const;
};

struct SurrogateConfig {
  int n_train = 120;
  int multistarts = 8;
  std::uint64_t train_seed = 4242;
  std::uint64_t fit_seed = 55;

  GpFitConfig fit_config() const;
};

struct OutputConfig {
  std::string dir = "out";
  bool write_weights = false;
};

struct ExperimentConfig {
  TestbedConfig testbed;
  SurrogateConfig surrogate;
  std::vector<Method> methods = {Method::no_error, Method::uniform_error, Method::hier_map,
                                 Method::hier_full_bayes, Method::embedded};
  MethodConfig method;  // defaults are the paper-scale operating point
  OutputConfig output;
  int threads = 0;  // 0: hardware concurrency
  std::uint64_t base_seed = 1;
  double zeta = 0.95;
  int confidence_grid = 21;  // per-dimension grid for the confidence map

  void validate() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical serialization: every key in a fixed order. Parsing it back gives
// an identical configuration; its FNV-1a hash identifies the run.
std::string config_to_text(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace hiercal
