#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "hiercal/likelihood.hpp"
#include "hiercal/mcmc.hpp"

namespace hiercal {

// First-order Legendre-uniform PC embedding: the calibration vector becomes
// lambda1 + diag(lambda2 Xi^T) with Xi uniform on [-1,1]^q.
struct EmbeddedParams {
  Eigen::VectorXd lambda1;  // location
  Eigen::VectorXd lambda2;  // half-width
};

Eigen::VectorXd pc_embed(const Eigen::VectorXd& lambda1, const Eigen::VectorXd& lambda2,
                         const Eigen::VectorXd& xi);

// Feasible iff for every i: lambda2_i > 0, lambda1_i - lambda2_i > 0 and
// lambda1_i + lambda2_i < 1, so every embedded point stays inside (0,1)^q.
bool embedded_feasible(const EmbeddedParams& params);

// Unnormalized constrained-uniform prior: 0 if feasible, -inf otherwise.
double embedded_prior_logpdf(const EmbeddedParams& params);

// Xi draws shared by every likelihood evaluation of a chain (common random
// numbers), so the MCMC target is a fixed function.
struct XiBank {
  Eigen::MatrixXd xi;  // R×q in [-1,1]

  int size() const { return static_cast<int>(xi.rows()); }
};

XiBank xi_bank(int stochastic_samples, int param_dim, std::uint64_t seed);

// Independent-normal likelihood approximation: per observation point, the
// mean over the xi bank of the embedded predictions, with variance the
// sample variance of those predictions plus the mean surrogate variance
// plus sigma_eps^2. Costs exactly R*n predictive evaluations.
double embedded_log_likelihood(const EmbeddedParams& params, const MeasurementModel& model,
                               const XiBank& bank);

struct EmbeddedConfig {
  int param_dim = 0;            // q
  int stochastic_samples = 64;  // R
  int retained = 3000;          // M
  int thin = 5;
  int burn_in = -1;
  int adapt_start = 1000;
  int adapt_interval = 100;
  Eigen::VectorXd init_lambda1, init_lambda2;  // empty: (0.5, ..., 0.5) and (0.1, ..., 0.1)
  std::uint64_t seed = 0;
};

struct EmbeddedResult {
  Chain chain;                  // 2q-dimensional (lambda1, lambda2)
  Eigen::MatrixXd pushforward;  // (M*R)×q embedded points
  XiBank xi;
};

// MCMC over (lambda1, lambda2) targeting the embedded likelihood plus the
// constrained prior, followed by the pushforward sample lambda1_k +
// lambda2_k .* xi_r for every retained k and every bank row r.
EmbeddedResult embedded_calibrate(const MeasurementModel& model, const EmbeddedConfig& cfg);

}  // namespace hiercal
