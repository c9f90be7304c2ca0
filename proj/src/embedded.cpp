#include "hiercal/embedded.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hiercal/rng.hpp"
#include "hiercal/stats.hpp"

namespace hiercal {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Eigen::VectorXd pc_embed(const Eigen::VectorXd& lambda1, const Eigen::VectorXd& lambda2,
                         const Eigen::VectorXd& xi) {
  return lambda1.array() + lambda2.array() * xi.array();
}

bool embedded_feasible(const EmbeddedParams& params) {
  for (int i = 0; i < params.lambda1.size(); ++i) {
    const double l1 = params.lambda1[i], l2 = params.lambda2[i];
    if (!(l2 > 0.0 && l1 - l2 > 0.0 && l1 + l2 < 1.0)) return false;
  }
  return true;
}

double embedded_prior_logpdf(const EmbeddedParams& params) {
  return embedded_feasible(params) ? 0.0 : kNegInf;
}

XiBank xi_bank(int stochastic_samples, int param_dim, std::uint64_t seed) {
  XiBank bank;
  bank.xi.resize(stochastic_samples, param_dim);
  Rng rng(seed);
  for (int r = 0; r < stochastic_samples; ++r) {
    for (int i = 0; i < param_dim; ++i) bank.xi(r, i) = rng.uniform(-1.0, 1.0);
  }
  return bank;
}

double embedded_log_likelihood(const EmbeddedParams& params, const MeasurementModel& model,
                               const XiBank& bank) {
  const int n_xi = bank.size();
  if (n_xi < 2) throw std::invalid_argument("embedded_log_likelihood: need R >= 2");
  const int n = model.size();
  const double inv_r = 1.0 / static_cast<double>(n_xi);

  double total = 0.0;
  Eigen::VectorXd means(n_xi);
  for (int j = 0; j < n; ++j) {
    double gp_var_sum = 0.0;
    for (int r = 0; r < n_xi; ++r) {
      const Eigen::VectorXd lam = pc_embed(params.lambda1, params.lambda2, bank.xi.row(r));
      const auto [m, v] = model.outputs[j]->eval(lam);
      if (model.counter != nullptr) model.counter->add(model.channel);
      if (!(std::isfinite(m) && std::isfinite(v))) return kNegInf;
      means[r] = m;
      gp_var_sum += v;
    }
    const double mu = means.mean();
    const double spread =
        (means.array() - mu).square().sum() / static_cast<double>(n_xi - 1);
    const double s2 = spread + inv_r * gp_var_sum + model.sigma_eps * model.sigma_eps;
    const double resid = model.y[j] - mu;
    total += -0.5 * std::log(stats::two_pi * s2) - resid * resid / (2.0 * s2);
  }
  return total;
}

EmbeddedResult embedded_calibrate(const MeasurementModel& model, const EmbeddedConfig& cfg) {
  const int param_dim = cfg.param_dim;
  if (param_dim < 1) throw std::invalid_argument("embedded_calibrate: param_dim must be set");

  EmbeddedResult result;
  result.xi = xi_bank(cfg.stochastic_samples, param_dim, mix_seed(cfg.seed, 0x71baULL));

  Eigen::VectorXd l1 = cfg.init_lambda1.size() > 0
                           ? cfg.init_lambda1
                           : Eigen::VectorXd::Constant(param_dim, 0.5);
  Eigen::VectorXd l2 = cfg.init_lambda2.size() > 0
                           ? cfg.init_lambda2
                           : Eigen::VectorXd::Constant(param_dim, 0.1);

  Box box;
  box.lo = Eigen::VectorXd::Zero(2 * param_dim);
  box.hi = Eigen::VectorXd::Ones(2 * param_dim);

  McmcConfig mcfg;
  mcfg.thin = cfg.thin;
  mcfg.burn_in = cfg.burn_in >= 0 ? cfg.burn_in : std::max(200, cfg.retained * cfg.thin / 4);
  mcfg.n_steps = mcfg.burn_in + cfg.retained * cfg.thin;
  mcfg.adapt_start = cfg.adapt_start;
  mcfg.adapt_interval = cfg.adapt_interval;
  mcfg.seed = mix_seed(cfg.seed, 0xc4a1ULL);
  mcfg.init.resize(2 * param_dim);
  mcfg.init << l1, l2;

  model.channel = RunChannel::chain;
  const auto target = [&](const Eigen::VectorXd& theta) {
    EmbeddedParams p{theta.head(param_dim), theta.tail(param_dim)};
    const double lp = embedded_prior_logpdf(p);
    if (lp == kNegInf) return kNegInf;
    return embedded_log_likelihood(p, model, result.xi) + lp;
  };
  result.chain = dram_sample(target, box, mcfg);

  const int m = result.chain.size();
  const int n_xi = result.xi.size();
  result.pushforward.resize(static_cast<Eigen::Index>(m) * n_xi, param_dim);
  for (int k = 0; k < m; ++k) {
    const Eigen::VectorXd pl1 = result.chain.samples.row(k).head(param_dim);
    const Eigen::VectorXd pl2 = result.chain.samples.row(k).tail(param_dim);
    for (int r = 0; r < n_xi; ++r) {
      result.pushforward.row(static_cast<Eigen::Index>(k) * n_xi + r) =
          pc_embed(pl1, pl2, result.xi.row(r));
    }
  }
  return result;
}

}  // namespace hiercal
