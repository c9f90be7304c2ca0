#include "hiercal/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "hiercal/stats.hpp"

namespace hiercal {

std::string method_name(Method m) {
  switch (m) {
    case Method::no_error: return "no_error";
    case Method::uniform_error: return "uniform_error";
    case Method::hier_map: return "hier_map";
    case Method::hier_full_bayes: return "hier_full_bayes";
    case Method::embedded: return "embedded";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "no_error") return Method::no_error;
  if (name == "uniform_error") return Method::uniform_error;
  if (name == "hier_map") return Method::hier_map;
  if (name == "hier_full_bayes") return Method::hier_full_bayes;
  if (name == "embedded") return Method::embedded;
  throw std::invalid_argument("unknown method: " + name);
}

namespace {

// Flat-prior posterior chain over a sub-box of the parameters; used by the
// no_error (physical block only) and uniform_error (full block) strategies.
Chain sample_uniform_posterior(const MeasurementModel& model, int chain_dim,
                               const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& embed,
                               const ChainShape& shape, std::uint64_t seed) {
  McmcConfig cfg = shape.mcmc(seed);
  model.channel = RunChannel::chain;
  const auto target = [&](const Eigen::VectorXd& x) { return model.log_likelihood(embed(x)); };
  return dram_sample(target, Box::unit(chain_dim), cfg);
}

}  // namespace

CalibrationRun run_method(Method method, const CalibrationProblem& problem,
                          const MeasurementModel& model, const MethodConfig& cfg,
                          std::uint64_t seed) {
  CalibrationRun run;
  const int p = problem.physical_dim;
  const int q = problem.param_dim;

  switch (method) {
    case Method::no_error: {
      const auto embed = [&](const Eigen::VectorXd& lam_p) {
        Eigen::VectorXd full = Eigen::VectorXd::Constant(q, cfg.nominal_error_value);
        full.head(p) = lam_p;
        return full;
      };
      ChainShape shape = cfg.lambda_chain;
      shape.retained = cfg.lambda_samples;
      Chain chain =
          sample_uniform_posterior(model, p, embed, shape, mix_seed(seed, 0x90e3ULL));
      Eigen::MatrixXd full(chain.size(), q);
      for (int k = 0; k < chain.size(); ++k) full.row(k) = embed(chain.samples.row(k));
      run.ensemble = plugin_ensemble(std::move(full));
      run.chain = std::move(chain);
      break;
    }
    case Method::uniform_error: {
      const auto identity = [](const Eigen::VectorXd& lam) { return lam; };
      ChainShape shape = cfg.lambda_chain;
      shape.retained = cfg.lambda_samples;
      Chain chain =
          sample_uniform_posterior(model, q, identity, shape, mix_seed(seed, 0x90e3ULL));
      run.ensemble = plugin_ensemble(chain.samples);
      run.chain = std::move(chain);
      break;
    }
    case Method::hier_map:
    case Method::hier_full_bayes: {
      const HierPrior prior = HierPrior::standard(p, q);
      MapConfig mc;
      mc.tau = cfg.tau;
      mc.max_iters = cfg.map_max_iters;
      mc.bank_size = cfg.bank_size;
      mc.multistarts = cfg.map_multistarts;
      mc.seed = mix_seed(seed, 0x3a95ULL);
      run.map = map_iterate(prior, flat_alpha_prior(), model, mc);

      FullBayesConfig fb;
      fb.lambda_samples = cfg.lambda_samples;
      fb.alpha_samples = cfg.alpha_samples;
      fb.kappa = cfg.kappa;
      fb.lambda_chain = cfg.lambda_chain;
      fb.alpha_chain = cfg.alpha_chain;
      fb.rebuild_bank = cfg.rebuild_bank;
      fb.bank_size = cfg.bank_size;
      fb.seed = mix_seed(seed, 0xfb01ULL);

      if (method == Method::hier_full_bayes) {
        run.ensemble = full_bayes_sample(prior, model, *run.map, fb);
      } else {
        // identical lambda chain to the full-Bayes route (same stream), with
        // the plug-in uniform weighting
        ChainShape shape = fb.lambda_chain;
        shape.retained = fb.lambda_samples;
        Chain chain = sample_lambda_posterior(prior, model, run.map->alpha_star, shape,
                                              mix_seed(fb.seed, 0x1a3bdaULL));
        run.ensemble = plugin_ensemble(chain.samples);
        run.ensemble.alpha_ref = run.map->alpha_star;
        run.chain = std::move(chain);
      }
      break;
    }
    case Method::embedded: {
      EmbeddedConfig ec;
      ec.param_dim = q;
      ec.stochastic_samples = cfg.stochastic_samples;
      ec.retained = cfg.lambda_samples;
      ec.thin = cfg.lambda_chain.thin;
      ec.burn_in = cfg.lambda_chain.burn_in;
      ec.adapt_start = cfg.lambda_chain.adapt_start;
      ec.adapt_interval = cfg.lambda_chain.adapt_interval;
      ec.seed = mix_seed(seed, 0xe3bedULL);
      EmbeddedResult er = embedded_calibrate(model, ec);
      run.ensemble = plugin_ensemble(er.pushforward);
      run.chain = er.chain;
      run.embedded_result = std::move(er);
      break;
    }
  }
  return run;
}

double rmsre(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size() || predictions.empty()) {
    throw std::invalid_argument("rmsre: size mismatch or empty input");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < truths.size(); ++j) {
    if (truths[j] == 0.0) throw std::invalid_argument("rmsre: zero truth value");
    const double rel = (predictions[j] - truths[j]) / truths[j];
    acc += rel * rel;
  }
  return std::sqrt(acc / static_cast<double>(truths.size()));
}

double quantile_09(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("quantile_09: empty input");
  std::sort(values.begin(), values.end());
  const double h = 0.9 * static_cast<double>(values.size() - 1);  // 0-based rank
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double interval_probability(const PosteriorEnsemble& ens, const Eigen::VectorXd& fhat,
                            const Eigen::VectorXd& var, double predictive_mean, double truth) {
  const double eta = std::abs(truth - predictive_mean);
  const double a = predictive_mean - eta;
  const double b = predictive_mean + eta;
  Eigen::VectorXd h(fhat.size());
  for (int k = 0; k < fhat.size(); ++k) {
    if (var[k] > 0.0) {
      const double sd = std::sqrt(var[k]);
      h[k] = stats::norm_cdf((b - fhat[k]) / sd) - stats::norm_cdf((a - fhat[k]) / sd);
    } else {
      h[k] = (a <= fhat[k] && fhat[k] <= b) ? 1.0 : 0.0;
    }
  }
  return posterior_expectation_values(ens, h);
}

double interval_probability(const PosteriorEnsemble& ens, const OutputModel& output,
                            double predictive_mean, double truth) {
  const int m = ens.sample_count();
  Eigen::VectorXd fhat(m), var(m);
  for (int k = 0; k < m; ++k) {
    const auto [f, v] = output.eval(ens.lambda_samples.row(k));
    fhat[k] = f;
    var[k] = v;
  }
  return interval_probability(ens, fhat, var, predictive_mean, truth);
}

namespace {

struct FoldOutcome {
  bool ok = false;
  std::vector<PointReport> rows;
  Eigen::VectorXd alpha_star;  // hier methods
  std::string error;
};

}  // namespace

LooReport loo_evaluate(const CalibrationProblem& problem, const ObservationSet& obs,
                       const SurrogateSet& surrogates, Method method, const MethodConfig& cfg,
                       std::uint64_t seed, EvalCounter* counter, int threads) {
  const int n = obs.size();
  const int n_out = problem.output_dim;
  if (n < 2) throw std::invalid_argument("loo_evaluate: need at least 2 observations");

  std::vector<FoldOutcome> outcomes(n);
  std::vector<EvalCounter> fold_counters(n);

  auto run_fold = [&](int j) {
    FoldOutcome& out = outcomes[j];
    try {
      MeasurementModel full = surrogate_measurement_model(obs, surrogates, &fold_counters[j]);
      const MeasurementModel fold = full.loo(j);
      const std::uint64_t fold_seed =
          mix_seed(seed, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(method));
      CalibrationRun run = run_method(method, problem, fold, cfg, fold_seed);
      if (run.map.has_value()) out.alpha_star = run.map->alpha_star;

      const int m = run.ensemble.sample_count();
      // one code run per retained sample covers every output at this point
      fold_counters[j].add(RunChannel::prediction, static_cast<std::uint64_t>(m));
      for (int t = 0; t < n_out; ++t) {
        const GpSurrogate& gp = surrogates.at(t, j);
        Eigen::VectorXd fhat(m), var(m);
        for (int k = 0; k < m; ++k) {
          const auto [f, v] = gp.predict(run.ensemble.lambda_samples.row(k));
          fhat[k] = f;
          var[k] = v;
        }
        Eigen::VectorXd second = fhat.array().square() + var.array();
        const double mean = posterior_expectation_values(run.ensemble, fhat);
        const double variance =
            std::max(0.0, posterior_expectation_values(run.ensemble, second) - mean * mean);
        const double truth = obs.truth(j, t);
        const double p_hat = interval_probability(run.ensemble, fhat, var, mean, truth);
        out.rows.push_back({j, t, mean, std::sqrt(variance), truth, p_hat});
      }
      out.ok = true;
    } catch (const std::exception& e) {
      out.ok = false;
      out.error = e.what();
    }
  };

  if (threads <= 1) {
    for (int j = 0; j < n; ++j) run_fold(j);
  } else {
    std::atomic<int> next{0};
    std::vector<std::future<void>> workers;
    const int n_workers = std::min(threads, n);
    for (int w = 0; w < n_workers; ++w) {
      workers.push_back(std::async(std::launch::async, [&] {
        for (int j = next.fetch_add(1); j < n; j = next.fetch_add(1)) run_fold(j);
      }));
    }
    for (auto& f : workers) f.get();
  }

  LooReport report;
  report.method = method;
  for (int j = 0; j < n; ++j) {
    if (counter != nullptr) counter->merge(fold_counters[j]);
    if (!outcomes[j].ok) {
      report.failed_folds.push_back(j);
      std::cerr << "loo_evaluate[" << method_name(method) << "]: fold " << j
                << " failed: " << outcomes[j].error << "\n";
      continue;
    }
    for (const auto& row : outcomes[j].rows) report.per_point.push_back(row);
    if (outcomes[j].alpha_star.size() > 0) {
      report.fold_alpha_star.push_back(outcomes[j].alpha_star);
    }
  }

  report.rmsre.resize(n_out);
  report.p_quantile.resize(n_out);
  for (int t = 0; t < n_out; ++t) {
    std::vector<double> preds, truths, probs;
    for (const auto& row : report.per_point) {
      if (row.output != t) continue;
      preds.push_back(row.mean);
      truths.push_back(row.truth);
      probs.push_back(row.p_hat);
    }
    report.rmsre[t] = preds.empty() ? std::numeric_limits<double>::quiet_NaN()
                                    : rmsre(preds, truths);
    report.p_quantile[t] = probs.empty() ? std::numeric_limits<double>::quiet_NaN()
                                         : quantile_09(probs);
  }
  return report;
}

}  // namespace hiercal
