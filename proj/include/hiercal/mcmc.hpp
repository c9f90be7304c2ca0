#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

namespace hiercal {

struct Box {
  Eigen::VectorXd lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Eigen::VectorXd& x) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
  }
  static Box unit(int d) { return {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)}; }
  static Box centered(const Eigen::VectorXd& c, double half_width) {
    return {c.array() - half_width, c.array() + half_width};
  }
  Box intersect(const Box& other) const {
    return {lo.cwiseMax(other.lo), hi.cwiseMin(other.hi)};
  }
};

using LogDensity = std::function<double(const Eigen::VectorXd&)>;

struct McmcConfig {
  int n_steps = 10000;
  int burn_in = -1;  // <0: 20% of n_steps
  int thin = 1;
  Eigen::VectorXd init;            // empty: box center
  Eigen::MatrixXd init_proposal_cov;  // empty: diag((0.1 width)^2 * 2.38^2/d)
  int adapt_start = 1000;
  int adapt_interval = 100;
  double dr_scale = 0.2;     // second-stage proposal std factor
  double cov_epsilon = 1e-10;
  std::uint64_t seed = 0;
};

struct Chain {
  Eigen::MatrixXd samples;       // retained samples, one per row
  Eigen::VectorXd log_densities;
  double acceptance_rate = 0.0;
  McmcConfig config;

  int size() const { return static_cast<int>(samples.rows()); }
};

// Delayed-rejection adaptive Metropolis over a box. Proposals outside the box
// are treated as log-density -inf; each first-stage rejection triggers one
// retry with the proposal covariance shrunk by dr_scale^2. The proposal
// covariance follows the running chain covariance scaled by 2.38^2/d, with
// cov_epsilon*I regularization, refreshed every adapt_interval steps once
// adapt_start steps have passed.
Chain dram_sample(const LogDensity& log_density, const Box& box, const McmcConfig& config);

}  // namespace hiercal
