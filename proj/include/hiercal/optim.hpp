#pragma once

#include <Eigen/Dense>
#include <functional>

namespace hiercal::optim {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct Result {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

struct NelderMeadOptions {
  int max_evals = 600;
  double x_tol = 1e-8;
  double f_tol = 1e-11;
  double init_step = 0.08;  // initial simplex edge, as a fraction of box width
};

// Simplex minimization with candidates clamped to [lo, hi].
Result nelder_mead_min(const Objective& f, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                       const Eigen::VectorXd& x0, const NelderMeadOptions& opts = {});

struct QuasiNewtonOptions {
  int max_iters = 150;
  double grad_tol = 1e-8;
  double step_tol = 1e-11;
  double fd_step = 1e-6;  // relative central-difference step
};

// Projected BFGS with numerical gradients; iterates stay in [lo, hi].
Result quasi_newton_box_min(const Objective& f, const Eigen::VectorXd& lo,
                            const Eigen::VectorXd& hi, const Eigen::VectorXd& x0,
                            const QuasiNewtonOptions& opts = {});

}  // namespace hiercal::optim
