#include "hiercal/testbed.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "hiercal/rng.hpp"

namespace hiercal {

CalibrationProblem canonical_simulator() {
  CalibrationProblem pb;
  pb.control_dim = 3;
  pb.physical_dim = 4;
  pb.param_dim = 6;
  pb.output_dim = 3;
  pb.observed_index = 0;
  pb.simulator = [](const Eigen::VectorXd& x, const Eigen::VectorXd& lam) {
    const double l0 = x[0], r0 = x[1], v0 = x[2];
    Eigen::VectorXd y(3);
    y[0] = 0.2 * l0 + v0 * (1.0 + 0.5 * lam[0] + 0.3 * lam[1]) + 0.15 * lam[4] -
           0.1 * lam[5] * r0;
    y[1] = 0.8 * r0 + 0.6 * v0 * (0.5 + 0.4 * lam[2]) + 0.1 * lam[0] * v0 * v0 -
           0.12 * lam[4] + 0.08 * lam[5];
    y[2] = 0.5 + 0.7 * v0 * v0 * (0.6 + 0.4 * lam[3]) + 0.1 * l0 * lam[1] - 0.1 * lam[4] -
           0.05 * lam[5];
    return y;
  };
  return pb;
}

Eigen::VectorXd default_lambda0() {
  Eigen::VectorXd l0(6);
  l0 << 0.4, 0.6, 0.5, 0.5, 0.3, 0.7;
  return l0;
}

Design lhs_design(int n, int s, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("lhs_design: need n >= 1");
  if (s < 1) throw std::invalid_argument("lhs_design: need s >= 1");
  Rng rng(seed);
  Design d;
  d.seed = seed;
  d.points.resize(n, s);
  std::vector<int> strata(n);
  for (int dim = 0; dim < s; ++dim) {
    for (int k = 0; k < n; ++k) strata[k] = k;
    for (int k = n - 1; k > 0; --k) {
      std::swap(strata[k], strata[rng.index(static_cast<std::size_t>(k) + 1)]);
    }
    for (int k = 0; k < n; ++k) {
      d.points(k, dim) = (strata[k] + rng.uniform()) / n;
    }
  }
  return d;
}

ObservationSet generate_observations(const CalibrationProblem& problem,
                                     const GroundTruthConfig& truth_cfg, const Design& design,
                                     double sigma_eps, std::uint64_t seed) {
  const int n = design.size();
  if (n < 1) throw std::invalid_argument("generate_observations: empty design");
  if (truth_cfg.lambda0.size() != problem.param_dim) {
    throw std::invalid_argument("generate_observations: lambda0 dimension mismatch");
  }

  ObservationSet obs;
  obs.design = design;
  obs.sigma_eps = sigma_eps;
  obs.observed_index = problem.observed_index;
  obs.truth_cfg = truth_cfg;
  obs.noise_seed = seed;
  obs.truth.resize(n, problem.output_dim);
  obs.values.resize(n);

  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd w = design.points.row(j);
    w[problem.control_dim - 1] += truth_cfg.delta_v;
    if (w[problem.control_dim - 1] > 1.0) {
      w[problem.control_dim - 1] = 1.0;
      obs.omega_clamped = true;
    }
    obs.truth.row(j) = problem.simulator(w, truth_cfg.lambda0);
  }

  // Dedicated noise stream: surrogate/MCMC seeds never perturb the data.
  Rng noise(mix_seed(seed, 0x0b5e7fULL));
  for (int j = 0; j < n; ++j) {
    obs.values[j] = obs.truth(j, problem.observed_index) + sigma_eps * noise.normal();
  }
  return obs;
}

}  // namespace hiercal
