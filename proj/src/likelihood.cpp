#include "hiercal/likelihood.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "hiercal/stats.hpp"

namespace hiercal {

double MeasurementModel::log_likelihood(const Eigen::VectorXd& lambda) const {
  double total = 0.0;
  for (int j = 0; j < size(); ++j) {
    const auto [m, v] = outputs[j]->eval(lambda);
    if (counter != nullptr) counter->add(channel);
    if (!(std::isfinite(m) && std::isfinite(v))) {
      static bool warned = false;
      if (!warned) {
        std::cerr << "MeasurementModel: non-finite predictive output at point " << j
                  << ", returning -inf\n";
        warned = true;
      }
      return -std::numeric_limits<double>::infinity();
    }
    const double s2 = sigma_eps * sigma_eps + v;
    const double r = y[j] - m;
    total += -0.5 * std::log(stats::two_pi * s2) - r * r / (2.0 * s2);
  }
  return total;
}

MeasurementModel MeasurementModel::loo(int j) const {
  if (j < 0 || j >= size()) throw std::out_of_range("MeasurementModel::loo: index out of range");
  if (size() < 2) throw std::invalid_argument("MeasurementModel::loo: need at least 2 points");
  MeasurementModel held = *this;
  held.y.resize(size() - 1);
  held.outputs.clear();
  int k = 0;
  for (int i = 0; i < size(); ++i) {
    if (i == j) continue;
    held.y[k++] = y[i];
    held.outputs.push_back(outputs[i]);
  }
  return held;
}

MeasurementModel surrogate_measurement_model(const ObservationSet& obs,
                                             const SurrogateSet& surrogates,
                                             EvalCounter* counter) {
  MeasurementModel model;
  model.y = obs.values;
  model.sigma_eps = obs.sigma_eps;
  model.counter = counter;
  for (int j = 0; j < obs.size(); ++j) {
    model.outputs.push_back(
        std::make_shared<SurrogateOutput>(&surrogates.at(obs.observed_index, j)));
  }
  return model;
}

MeasurementModel exact_measurement_model(const CalibrationProblem& problem,
                                         const ObservationSet& obs, EvalCounter* counter) {
  MeasurementModel model;
  model.y = obs.values;
  model.sigma_eps = obs.sigma_eps;
  model.counter = counter;
  for (int j = 0; j < obs.size(); ++j) {
    model.outputs.push_back(std::make_shared<ExactOutput>(
        problem.simulator, obs.design.points.row(j), obs.observed_index));
  }
  return model;
}

}  // namespace hiercal
