#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

namespace hiercal {

// Deterministic multi-output code: x are control variables, lambda the
// calibration parameters, the result holds all outputs at once.
using Simulator = std::function<Eigen::VectorXd(const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& lambda)>;

struct CalibrationProblem {
  int control_dim = 0;     // s
  int physical_dim = 0;    // p, physical calibration parameters
  int param_dim = 0;       // q, physical + model-error parameters
  int output_dim = 0;      // T
  int observed_index = 0;  // 0-based index of the observed output
  Simulator simulator;

  int error_dim() const { return param_dim - physical_dim; }
};

struct Design {
  Eigen::MatrixXd points;  // n×s, each row in [0,1]^s
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(points.rows()); }
};

struct GroundTruthConfig {
  Eigen::VectorXd lambda0;  // parameters used to synthesize the data
  double delta_v = 0.1;     // shift applied to the last control variable
};

struct ObservationSet {
  Eigen::VectorXd values;  // n noisy measurements of the observed output
  Design design;
  double sigma_eps = 0.0;
  Eigen::MatrixXd truth;  // n×T noiseless values, kept for metric evaluation only
  int observed_index = 0;
  GroundTruthConfig truth_cfg;
  std::uint64_t noise_seed = 0;
  bool omega_clamped = false;  // set when v0 + delta_v left the unit cube

  int size() const { return static_cast<int>(values.size()); }
};

// The fixed 3-output analytic code: 3 control variables (l0, r0, v0),
// 4 physical parameters and 2 model-error parameters, all on [0,1].
// Output 1 increases with lambda[4]; outputs 2 and 3 decrease with it.
CalibrationProblem canonical_simulator();

Eigen::VectorXd default_lambda0();

// Plain stratified-permutation Latin hypercube: one point per axis stratum
// [k/n, (k+1)/n) in every dimension. Throws on n < 1.
Design lhs_design(int n, int s, std::uint64_t seed);

// Virtual-measurement protocol: true values y_t(x) = f_t(omega(x), lambda0)
// with omega(x) = (x_1, ..., x_{s-1}, x_s + delta_v), plus iid N(0, sigma^2)
// noise on the observed output. The noise stream depends only on `seed`.
ObservationSet generate_observations(const CalibrationProblem& problem,
                                     const GroundTruthConfig& truth_cfg, const Design& design,
                                     double sigma_eps, std::uint64_t seed);

}  // namespace hiercal
