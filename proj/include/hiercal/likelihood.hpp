#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "hiercal/eval_counter.hpp"
#include "hiercal/gp.hpp"
#include "hiercal/testbed.hpp"

namespace hiercal {

// Predictive handle for one (output, point): lambda -> (mean, variance).
class OutputModel {
 public:
  virtual ~OutputModel() = default;
  virtual std::pair<double, double> eval(const Eigen::VectorXd& lambda) const = 0;
};

class SurrogateOutput final : public OutputModel {
 public:
  explicit SurrogateOutput(const GpSurrogate* gp) : gp_(gp) {}
  std::pair<double, double> eval(const Eigen::VectorXd& lambda) const override {
    return gp_->predict(lambda);
  }

 private:
  const GpSurrogate* gp_;
};

// True-code route behind the same interface; zero predictive variance.
class ExactOutput final : public OutputModel {
 public:
  ExactOutput(Simulator simulator, Eigen::VectorXd x, int output)
      : simulator_(std::move(simulator)), x_(std::move(x)), output_(output) {}
  std::pair<double, double> eval(const Eigen::VectorXd& lambda) const override {
    return {simulator_(x_, lambda)[output_], 0.0};
  }

 private:
  Simulator simulator_;
  Eigen::VectorXd x_;
  int output_;
};

// Gaussian measurement model for the observed output: independent per-point
// total noise sigma_eps^2 + v(x_j, lambda).
struct MeasurementModel {
  Eigen::VectorXd y;  // n observations
  std::vector<std::shared_ptr<const OutputModel>> outputs;  // one per point
  double sigma_eps = 0.0;

  EvalCounter* counter = nullptr;                  // optional cost instrumentation
  mutable RunChannel channel = RunChannel::other;  // stage tag set by the pipeline

  int size() const { return static_cast<int>(y.size()); }

  // sum_j log N(y_j; mean_j(lambda), sigma_eps^2 + var_j(lambda)); -inf and a
  // stderr warning if any predictive output is non-finite.
  double log_likelihood(const Eigen::VectorXd& lambda) const;

  // model with observation j and its predictive handle removed
  MeasurementModel loo(int j) const;
};

// Builds the measurement model of an observation set on GP surrogates
// (output observed_index at each design point).
MeasurementModel surrogate_measurement_model(const ObservationSet& obs,
                                             const SurrogateSet& surrogates,
                                             EvalCounter* counter = nullptr);

// Same contract on the true simulator (predictive variance identically 0).
MeasurementModel exact_measurement_model(const CalibrationProblem& problem,
                                         const ObservationSet& obs,
                                         EvalCounter* counter = nullptr);

}  // namespace hiercal
