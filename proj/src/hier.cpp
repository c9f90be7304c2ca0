#include "hiercal/hier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hiercal/optim.hpp"
#include "hiercal/stats.hpp"
#include "hiercal/testbed.hpp"

namespace hiercal {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

HierPrior HierPrior::standard(int physical_dim, int param_dim) {
  HierPrior prior;
  prior.physical_dim = physical_dim;
  prior.param_dim = param_dim;
  prior.sigma_err = 0.45;
  const int r = param_dim - physical_dim;
  prior.alpha_box = {Eigen::VectorXd::Constant(r, -10.0), Eigen::VectorXd::Constant(r, 10.0)};
  return prior;
}

double HierPrior::logpdf(const Eigen::VectorXd& lambda, const Eigen::VectorXd& alpha) const {
  for (int i = 0; i < param_dim; ++i) {
    if (lambda[i] < 0.0 || lambda[i] > 1.0) return kNegInf;
  }
  double total = 0.0;
  for (int i = 0; i < error_dim(); ++i) {
    total += stats::tn_logpdf(lambda[physical_dim + i], alpha[i], sigma_err, 0.0, 1.0);
  }
  return total;
}

Eigen::VectorXd HierPrior::sample_lambda(const Eigen::VectorXd& alpha, Rng& rng) const {
  Eigen::VectorXd lam(param_dim);
  for (int i = 0; i < physical_dim; ++i) lam[i] = rng.uniform();
  for (int i = 0; i < error_dim(); ++i) {
    lam[physical_dim + i] = stats::tn_sample(rng, alpha[i], sigma_err, 0.0, 1.0);
  }
  return lam;
}

IsBank is_bank_build_fn(const HierPrior& prior, const Eigen::VectorXd& alpha_ref, int bank_size,
                        const LogLikFn& log_lik, std::uint64_t seed) {
  if (bank_size < 1) throw std::invalid_argument("is_bank_build: need bank_size >= 1");
  IsBank bank;
  bank.alpha_ref = alpha_ref;
  bank.lambdas.resize(bank_size, prior.param_dim);
  bank.cached_loglik.resize(bank_size);
  bank.cached_logprior_ref.resize(bank_size);
  Rng rng(seed);
  for (int k = 0; k < bank_size; ++k) {
    const Eigen::VectorXd lam = prior.sample_lambda(alpha_ref, rng);
    bank.lambdas.row(k) = lam;
    bank.cached_loglik[k] = log_lik(lam);
    bank.cached_logprior_ref[k] = prior.logpdf(lam, alpha_ref);
  }
  return bank;
}

IsBank is_bank_build(const HierPrior& prior, const Eigen::VectorXd& alpha_ref, int bank_size,
                     const MeasurementModel& model, std::uint64_t seed) {
  model.channel = RunChannel::bank;
  return is_bank_build_fn(
      prior, alpha_ref, bank_size,
      [&model](const Eigen::VectorXd& lam) { return model.log_likelihood(lam); }, seed);
}

double is_loglik_alpha(const HierPrior& prior, const IsBank& bank,
                       const Eigen::VectorXd& alpha) {
  const int n = bank.size();
  std::vector<double> terms(n);
  for (int k = 0; k < n; ++k) {
    terms[k] = bank.cached_loglik[k] + prior.logpdf(bank.lambdas.row(k), alpha) -
               bank.cached_logprior_ref[k];
  }
  return stats::log_mean_exp(terms);
}

namespace {

// argmax of is_loglik_alpha + log p_A over the alpha box
std::pair<Eigen::VectorXd, double> maximize_alpha_objective(const HierPrior& prior,
                                                            const IsBank& bank,
                                                            const LogPriorAlpha& log_p_alpha,
                                                            const Eigen::VectorXd& start,
                                                            int multistarts,
                                                            std::uint64_t seed) {
  const auto neg = [&](const Eigen::VectorXd& a) {
    return -(is_loglik_alpha(prior, bank, a) + log_p_alpha(a));
  };
  const Box& box = prior.alpha_box;
  std::vector<Eigen::VectorXd> starts{start};
  if (multistarts > 1) {
    const Design extra = lhs_design(multistarts - 1, prior.error_dim(), mix_seed(seed, 0x5744ULL));
    for (int i = 0; i < extra.size(); ++i) {
      starts.push_back(box.lo.array() +
                       extra.points.row(i).transpose().array() * (box.hi - box.lo).array());
    }
  }
  Eigen::VectorXd best_x = start;
  double best_neg = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    const auto res = optim::quasi_newton_box_min(neg, box.lo, box.hi, s, {});
    if (res.value < best_neg) {
      best_neg = res.value;
      best_x = res.x;
    }
  }
  return {best_x, -best_neg};
}

}  // namespace

MapResult map_iterate_fn(const HierPrior& prior, const LogPriorAlpha& log_p_alpha,
                         const LogLikFn& log_lik, const MapConfig& cfg) {
  if (cfg.tau <= 0.0) throw std::invalid_argument("map_iterate: tau must be > 0");
  Eigen::VectorXd alpha = cfg.alpha0.size() > 0
                              ? cfg.alpha0
                              : Eigen::VectorXd::Constant(prior.error_dim(), 0.5);
  if (!prior.alpha_box.contains(alpha)) {
    throw std::invalid_argument("map_iterate: alpha0 outside the alpha box");
  }

  MapResult result;
  result.tau = cfg.tau;
  for (int ell = 0; ell < cfg.max_iters; ++ell) {
    IsBank bank = is_bank_build_fn(prior, alpha, cfg.bank_size, log_lik,
                                   mix_seed(cfg.seed, 0xba7cULL, static_cast<std::uint64_t>(ell)));
    const auto [alpha_next, objective] = maximize_alpha_objective(
        prior, bank, log_p_alpha, alpha, cfg.multistarts,
        mix_seed(cfg.seed, 0x0a17ULL, static_cast<std::uint64_t>(ell)));
    const double nu = (alpha_next - alpha).norm();
    result.iterates.push_back({alpha_next, nu, objective});
    result.final_bank = std::move(bank);
    alpha = alpha_next;
    if (nu <= cfg.tau) {
      result.converged = true;
      break;
    }
  }
  // best iterate by estimated objective; the final one unless the search
  // wandered without converging
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.iterates.size(); ++i) {
    if (result.iterates[i].objective > result.iterates[best].objective) best = i;
  }
  result.alpha_star =
      result.converged ? result.iterates.back().alpha : result.iterates[best].alpha;
  return result;
}

MapResult map_iterate(const HierPrior& prior, const LogPriorAlpha& log_p_alpha,
                      const MeasurementModel& model, const MapConfig& cfg) {
  model.channel = RunChannel::bank;
  return map_iterate_fn(
      prior, log_p_alpha,
      [&model](const Eigen::VectorXd& lam) { return model.log_likelihood(lam); }, cfg);
}

double confidence_level(const HierPrior& prior, const IsBank& bank_prime,
                        const Eigen::VectorXd& alpha, double beta,
                        const LogPriorAlpha& log_p_alpha) {
  const int n = bank_prime.size();
  if (n < 2) throw std::invalid_argument("confidence_level: need at least 2 bank samples");
  if (beta < 1.0) throw std::invalid_argument("confidence_level: beta must be >= 1");

  // The statistic is invariant under a common positive scaling of all
  // terms, so likelihoods are shifted by their maximum and the two prior
  // densities by their own maximum before leaving log space.
  const double loglik_shift = bank_prime.cached_loglik.maxCoeff();
  const double lpa = log_p_alpha(alpha);
  const double lps = log_p_alpha(bank_prime.alpha_ref);
  const double prior_shift = std::max(lpa, lps);
  const double pa = std::exp(lpa - prior_shift);
  const double ps = std::exp(lps - prior_shift);

  std::vector<double> terms(n);
  for (int k = 0; k < n; ++k) {
    const double lik = std::exp(bank_prime.cached_loglik[k] - loglik_shift);
    const double ratio = std::exp(prior.logpdf(bank_prime.lambdas.row(k), alpha) -
                                  bank_prime.cached_logprior_ref[k]);
    terms[k] = lik * (ratio * pa - beta * ps);
  }
  const double m = stats::mean(terms);
  const double s = std::sqrt(stats::sample_variance(terms));
  if (s == 0.0) {
    if (-m > 0.0) return 1.0;
    if (-m < 0.0) return 0.0;
    return 0.5;
  }
  return stats::norm_cdf(std::sqrt(static_cast<double>(n)) * (-m) / s);
}

PosteriorEnsemble plugin_ensemble(Eigen::MatrixXd lambda_samples) {
  PosteriorEnsemble ens;
  const int m = static_cast<int>(lambda_samples.rows());
  ens.lambda_samples = std::move(lambda_samples);
  ens.alpha_samples.resize(0, 0);
  ens.weights = Eigen::MatrixXd::Constant(1, m, 1.0 / static_cast<double>(m));
  return ens;
}

McmcConfig ChainShape::mcmc(std::uint64_t seed) const {
  McmcConfig cfg;
  cfg.thin = thin;
  cfg.burn_in = burn_in >= 0 ? burn_in : std::max(200, retained * thin / 4);
  cfg.n_steps = cfg.burn_in + retained * thin;
  cfg.adapt_start = adapt_start;
  cfg.adapt_interval = adapt_interval;
  cfg.seed = seed;
  return cfg;
}

Chain sample_lambda_posterior(const HierPrior& prior, const MeasurementModel& model,
                              const Eigen::VectorXd& alpha_star, const ChainShape& shape,
                              std::uint64_t seed) {
  const Box box = Box::unit(prior.param_dim);
  McmcConfig cfg = shape.mcmc(seed);
  Eigen::VectorXd init = Eigen::VectorXd::Constant(prior.param_dim, 0.5);
  for (int i = 0; i < prior.error_dim(); ++i) {
    init[prior.physical_dim + i] = std::clamp(alpha_star[i], 0.05, 0.95);
  }
  cfg.init = init;
  model.channel = RunChannel::chain;
  const auto target = [&](const Eigen::VectorXd& lam) {
    const double lp = prior.logpdf(lam, alpha_star);
    if (lp == kNegInf) return kNegInf;
    return model.log_likelihood(lam) + lp;
  };
  return dram_sample(target, box, cfg);
}

PosteriorEnsemble full_bayes_sample(const HierPrior& prior, const MeasurementModel& model,
                                    const MapResult& map, const FullBayesConfig& cfg) {
  const Eigen::VectorXd& alpha_star = map.alpha_star;
  IsBank fresh;
  if (cfg.rebuild_bank) {
    fresh = is_bank_build(prior, alpha_star, cfg.bank_size, model,
                          mix_seed(cfg.seed, 0xf2e5ULL));
  }
  const IsBank& bank = cfg.rebuild_bank ? fresh : map.final_bank;

  // uniform p_A over the kappa-interval around alpha_star, clipped to the box
  const Box a_box = Box::centered(alpha_star, cfg.kappa).intersect(prior.alpha_box);
  ChainShape a_shape = cfg.alpha_chain;
  a_shape.retained = cfg.alpha_samples;
  McmcConfig a_cfg = a_shape.mcmc(mix_seed(cfg.seed, 0xa1fa5ULL));
  a_cfg.init = alpha_star;
  const Chain alpha_chain = dram_sample(
      [&](const Eigen::VectorXd& a) { return is_loglik_alpha(prior, bank, a); }, a_box, a_cfg);

  ChainShape l_shape = cfg.lambda_chain;
  l_shape.retained = cfg.lambda_samples;
  const Chain lambda_chain = sample_lambda_posterior(prior, model, alpha_star, l_shape,
                                                     mix_seed(cfg.seed, 0x1a3bdaULL));

  const int n_alpha = alpha_chain.size();
  const int n_lambda = lambda_chain.size();
  PosteriorEnsemble ens;
  ens.lambda_samples = lambda_chain.samples;
  ens.alpha_samples = alpha_chain.samples;
  ens.alpha_ref = alpha_star;
  ens.weights.resize(n_alpha, n_lambda);

  Eigen::VectorXd log_ref(n_lambda);
  for (int k = 0; k < n_lambda; ++k) {
    log_ref[k] = prior.logpdf(ens.lambda_samples.row(k), alpha_star);
  }
  std::vector<double> row(n_lambda);
  for (int i = 0; i < n_alpha; ++i) {
    for (int k = 0; k < n_lambda; ++k) {
      row[k] = prior.logpdf(ens.lambda_samples.row(k), alpha_chain.samples.row(i)) - log_ref[k];
    }
    const double lse = stats::log_sum_exp(row);
    if (!std::isfinite(lse)) {
      throw std::runtime_error("full_bayes_sample: weight row sums to zero (support violation)");
    }
    for (int k = 0; k < n_lambda; ++k) ens.weights(i, k) = std::exp(row[k] - lse);
  }
  return ens;
}

double posterior_expectation_values(const PosteriorEnsemble& ens, const Eigen::VectorXd& values) {
  const int n_alpha = ens.alpha_count();
  const int m = ens.sample_count();
  double acc = 0.0;
  for (int i = 0; i < n_alpha; ++i) {
    double num = 0.0, den = 0.0;
    for (int k = 0; k < m; ++k) {
      num += values[k] * ens.weights(i, k);
      den += ens.weights(i, k);
    }
    acc += num / den;
  }
  return acc / static_cast<double>(n_alpha);
}

double posterior_expectation(const PosteriorEnsemble& ens,
                             const std::function<double(const Eigen::VectorXd&)>& h) {
  Eigen::VectorXd values(ens.sample_count());
  for (int k = 0; k < ens.sample_count(); ++k) values[k] = h(ens.lambda_samples.row(k));
  return posterior_expectation_values(ens, values);
}

std::pair<double, double> predictive_moments(const PosteriorEnsemble& ens,
                                             const OutputModel& output) {
  const int m = ens.sample_count();
  Eigen::VectorXd fhat(m), second(m);
  for (int k = 0; k < m; ++k) {
    const auto [f, v] = output.eval(ens.lambda_samples.row(k));
    fhat[k] = f;
    second[k] = f * f + v;
  }
  const double mean = posterior_expectation_values(ens, fhat);
  const double var = std::max(0.0, posterior_expectation_values(ens, second) - mean * mean);
  return {mean, var};
}

}  // namespace hiercal
