#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "hiercal/likelihood.hpp"
#include "hiercal/mcmc.hpp"
#include "hiercal/rng.hpp"

namespace hiercal {

// Hierarchical prior on the augmented parameters: uniform over the physical
// block, truncated normal N(alpha_i, sigma_err^2) on [0,1] for each error
// coordinate. The support is exactly [0,1]^q for every alpha, which keeps
// every importance ratio finite.
struct HierPrior {
  int physical_dim = 0;
  int param_dim = 0;
  double sigma_err = 0.45;
  Box alpha_box;

  static HierPrior standard(int physical_dim, int param_dim);

  int error_dim() const { return param_dim - physical_dim; }

  // -inf outside the unit cube; the uniform block contributes 0.
  double logpdf(const Eigen::VectorXd& lambda, const Eigen::VectorXd& alpha) const;

  // uniform x inverse-CDF truncated-normal draw
  Eigen::VectorXd sample_lambda(const Eigen::VectorXd& alpha, Rng& rng) const;
};

// Reusable reference-alpha sample bank with cached per-sample likelihoods.
struct IsBank {
  Eigen::VectorXd alpha_ref;
  Eigen::MatrixXd lambdas;  // L×q
  Eigen::VectorXd cached_loglik;
  Eigen::VectorXd cached_logprior_ref;

  int size() const { return static_cast<int>(lambdas.rows()); }
};

using LogLikFn = std::function<double(const Eigen::VectorXd&)>;
using LogPriorAlpha = std::function<double(const Eigen::VectorXd&)>;

inline LogPriorAlpha flat_alpha_prior() {
  return [](const Eigen::VectorXd&) { return 0.0; };
}

IsBank is_bank_build(const HierPrior& prior, const Eigen::VectorXd& alpha_ref, int bank_size,
                     const MeasurementModel& model, std::uint64_t seed);

// Generic-likelihood variant (oracle tests, synthetic studies).
IsBank is_bank_build_fn(const HierPrior& prior, const Eigen::VectorXd& alpha_ref, int bank_size,
                        const LogLikFn& log_lik, std::uint64_t seed);

// log of the importance-sampling likelihood estimate of alpha: the log-mean
// of cached likelihoods reweighted by prior-density ratios, via log-sum-exp.
double is_loglik_alpha(const HierPrior& prior, const IsBank& bank,
                       const Eigen::VectorXd& alpha);

struct MapConfig {
  Eigen::VectorXd alpha0;  // empty: (0.5, ..., 0.5)
  double tau = 0.05;
  int max_iters = 20;
  int bank_size = 10000;
  int multistarts = 5;  // current iterate plus LHS starts
  std::uint64_t seed = 0;
};

struct MapIterate {
  Eigen::VectorXd alpha;
  double nu = 0.0;
  double objective = 0.0;
};

struct MapResult {
  Eigen::VectorXd alpha_star;
  std::vector<MapIterate> iterates;
  bool converged = false;
  double tau = 0.0;
  IsBank final_bank;  // bank of the last iteration, drawn at the penultimate alpha
};

// Iterative MAP estimation: rebuild the bank at the current iterate, maximize
// the estimated posterior density of alpha over the alpha box (bounded
// quasi-Newton, multi-start), stop when consecutive iterates move less than
// tau in Euclidean norm.
MapResult map_iterate(const HierPrior& prior, const LogPriorAlpha& log_p_alpha,
                      const MeasurementModel& model, const MapConfig& cfg);
MapResult map_iterate_fn(const HierPrior& prior, const LogPriorAlpha& log_p_alpha,
                         const LogLikFn& log_lik, const MapConfig& cfg);

// Asymptotic confidence level for p(alpha|y) < beta * p(alpha_ref|y), from
// the CLT on the per-sample combined terms of the bank (built at alpha_ref
// with L' samples). All likelihood work is shift-scaled, never raw.
double confidence_level(const HierPrior& prior, const IsBank& bank_prime,
                        const Eigen::VectorXd& alpha, double beta,
                        const LogPriorAlpha& log_p_alpha);

// Weighted posterior sample: lambda samples with one weight row per alpha
// sample. alpha_samples has zero rows for plug-in ensembles (uniform
// weights, the Eq.-(4)-style estimator).
struct PosteriorEnsemble {
  Eigen::MatrixXd lambda_samples;  // M×q
  Eigen::MatrixXd alpha_samples;   // N×r, may be 0×0
  Eigen::MatrixXd weights;         // N×M, rows normalized to sum 1
  Eigen::VectorXd alpha_ref;       // density denominator reference, if any

  int sample_count() const { return static_cast<int>(lambda_samples.rows()); }
  int alpha_count() const { return static_cast<int>(weights.rows()); }
};

// Unweighted ensemble over the given samples (plain Monte Carlo mean).
PosteriorEnsemble plugin_ensemble(Eigen::MatrixXd lambda_samples);

struct ChainShape {
  int retained = 1000;
  int thin = 5;
  int burn_in = -1;  // <0: max(200, retained*thin/4)
  int adapt_start = 1000;
  int adapt_interval = 100;

  McmcConfig mcmc(std::uint64_t seed) const;
};

struct FullBayesConfig {
  int lambda_samples = 3000;  // M
  int alpha_samples = 750;    // N
  double kappa = 4.0;
  ChainShape lambda_chain{.retained = 3000};
  ChainShape alpha_chain{.retained = 750};
  bool rebuild_bank = false;
  int bank_size = 10000;  // used only when rebuilding
  std::uint64_t seed = 0;
};

// Posterior lambda chain targeting p(y|lambda) p_L(lambda|alpha_star) on the
// unit cube. Charged to RunChannel::chain. Both hierarchical strategies draw
// this exact chain, so matching seeds give matching samples.
Chain sample_lambda_posterior(const HierPrior& prior, const MeasurementModel& model,
                              const Eigen::VectorXd& alpha_star, const ChainShape& shape,
                              std::uint64_t seed);

// Algorithm: sample alpha from the estimated posterior (uniform prior over
// the kappa-interval around alpha_star intersected with the alpha box),
// sample lambda under the plug-in prior, assemble the normalized
// prior-ratio weight matrix.
PosteriorEnsemble full_bayes_sample(const HierPrior& prior, const MeasurementModel& model,
                                    const MapResult& map, const FullBayesConfig& cfg);

// Self-normalized estimator: mean over alpha rows of the weighted sample
// average of h. With one uniform row this is the plain Monte Carlo mean.
double posterior_expectation(const PosteriorEnsemble& ens,
                             const std::function<double(const Eigen::VectorXd&)>& h);
double posterior_expectation_values(const PosteriorEnsemble& ens, const Eigen::VectorXd& values);

// Predictive mean and variance of one output through the ensemble, with the
// surrogate variance folded in by the law of total variance.
std::pair<double, double> predictive_moments(const PosteriorEnsemble& ens,
                                             const OutputModel& output);

}  // namespace hiercal
