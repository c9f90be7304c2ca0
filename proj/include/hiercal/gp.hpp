#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <utility>

#include "hiercal/eval_counter.hpp"
#include "hiercal/testbed.hpp"

namespace hiercal {

// Matern 5/2 covariance at scaled distance d >= 0.
double matern52(double d, double variance, double lengthscale);

struct KernelParams {
  double variance = 1.0;
  Eigen::VectorXd lengthscales;  // one per input dimension
  double nugget = 1e-8;
};

struct GpFitConfig {
  int multistarts = 8;
  double lengthscale_lo = 1e-2;
  double lengthscale_hi = 10.0;
  double variance_lo = 1e-6;
  double base_nugget = 1e-8;
  double max_nugget = 1e-4;
  int max_evals_per_start = 350;
  std::uint64_t seed = 0;
};

// Zero-mean-residual GP of lambda -> f_t(x, lambda) with constant prior mean
// (the training-target average) and anisotropic Matern 5/2 kernel.
class GpSurrogate {
 public:
  // Maximum marginal likelihood over (log variance, log lengthscales) by
  // multi-start simplex search from Latin-hypercube starts; the nugget is
  // escalated by decades up to max_nugget if the kernel matrix resists
  // Cholesky.
  static GpSurrogate fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                         const GpFitConfig& cfg = {});

  // Rebuild from known hyperparameters (deserialization, oracle tests).
  static GpSurrogate from_params(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                 const KernelParams& params, double prior_mean);

  // Posterior (mean, variance) at a query point; variance clamped at 0.
  std::pair<double, double> predict(const Eigen::VectorXd& lambda) const;

  double log_marginal_likelihood() const { return lml_; }
  const KernelParams& kernel() const { return params_; }
  double prior_mean() const { return mean_; }
  const Eigen::MatrixXd& train_inputs() const { return inputs_; }
  const Eigen::VectorXd& train_targets() const { return targets_; }

 private:
  GpSurrogate() = default;
  void factorize();  // builds K and its Cholesky factor at the current nugget

  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  KernelParams params_;
  double mean_ = 0.0;
  double lml_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;  // K^{-1} (targets - mean)
};

// One surrogate per (output t, design point). All surrogates share a single
// lambda training design, matching one code run per (x, lambda) pair.
class SurrogateSet {
 public:
  void insert(int t, int point, GpSurrogate gp);
  const GpSurrogate& at(int t, int point) const;
  bool contains(int t, int point) const;
  const std::map<std::pair<int, int>, GpSurrogate>& all() const { return surrogates_; }

 private:
  std::map<std::pair<int, int>, GpSurrogate> surrogates_;
};

// Fits surrogates for every output at every row of `points`. Simulator calls
// are charged to RunChannel::simulator when a counter is given. `threads`
// <= 1 disables parallel fitting.
SurrogateSet fit_surrogates(const CalibrationProblem& problem, const Eigen::MatrixXd& points,
                            int n_train, const GpFitConfig& cfg, std::uint64_t train_design_seed,
                            int threads = 1, EvalCounter* counter = nullptr);

}  // namespace hiercal
