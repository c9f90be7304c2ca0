#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hiercal/embedded.hpp"
#include "hiercal/hier.hpp"
#include "hiercal/likelihood.hpp"

namespace hiercal {

enum class Method { no_error, uniform_error, hier_map, hier_full_bayes, embedded };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

// Knobs shared by every calibration strategy; unused fields are ignored by
// methods that do not need them.
struct MethodConfig {
  int bank_size = 10000;             // L
  int lambda_samples = 3000;         // M
  int alpha_samples = 750;           // N
  int confidence_bank_size = 20000;  // L'
  double beta = 1.05;
  double kappa = 4.0;
  double tau = 0.05;
  int stochastic_samples = 64;  // R
  int map_max_iters = 20;
  int map_multistarts = 5;
  double nominal_error_value = 0.5;  // error coordinates pinned by no_error
  ChainShape lambda_chain;
  ChainShape alpha_chain;
  bool rebuild_bank = false;
};

// One end-to-end calibration on a measurement model.
struct CalibrationRun {
  PosteriorEnsemble ensemble;
  std::optional<MapResult> map;           // hierarchical methods
  std::optional<Chain> chain;             // raw sampling chain
  std::optional<EmbeddedResult> embedded_result;
};

CalibrationRun run_method(Method method, const CalibrationProblem& problem,
                          const MeasurementModel& model, const MethodConfig& cfg,
                          std::uint64_t seed);

struct PointReport {
  int point = 0;   // j
  int output = 0;  // t
  double mean = 0.0;
  double sd = 0.0;
  double truth = 0.0;
  double p_hat = 0.0;
};

struct LooReport {
  Method method = Method::no_error;
  std::vector<PointReport> per_point;  // n×T rows for the folds that succeeded
  Eigen::VectorXd rmsre;               // per output
  Eigen::VectorXd p_quantile;          // per output, 0.9 empirical quantile
  std::vector<int> failed_folds;
  std::vector<Eigen::VectorXd> fold_alpha_star;  // hier methods, one per fold

  bool complete() const { return failed_folds.empty(); }
};

// sqrt of the mean squared relative error; every truth must be nonzero.
double rmsre(std::span<const double> predictions, std::span<const double> truths);

// Empirical quantile with linear interpolation between order statistics at
// rank 1 + 0.9 (n-1).
double quantile_09(std::vector<double> values);

// Probability mass of the smallest centered prediction interval containing
// the true value, under the ensemble: the expectation of the Gaussian mass
// of [mean-eta, mean+eta] with eta = |truth - mean|. Zero surrogate variance
// degenerates to an indicator.
double interval_probability(const PosteriorEnsemble& ens, const Eigen::VectorXd& fhat,
                            const Eigen::VectorXd& var, double predictive_mean, double truth);
double interval_probability(const PosteriorEnsemble& ens, const OutputModel& output,
                            double predictive_mean, double truth);

// Leave-one-out evaluation: refit the chosen method on n-1 observations for
// every fold, predict every output at the held-out point, aggregate RMSRE
// and the 0.9 quantile of the interval probabilities per output. Folds run
// in parallel with derived seeds; a fold that throws is recorded as failed
// and excluded from the aggregates.
LooReport loo_evaluate(const CalibrationProblem& problem, const ObservationSet& obs,
                       const SurrogateSet& surrogates, Method method, const MethodConfig& cfg,
                       std::uint64_t seed, EvalCounter* counter = nullptr, int threads = 1);

}  // namespace hiercal
