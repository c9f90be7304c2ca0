#include "hiercal/mcmc.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hiercal/rng.hpp"

namespace hiercal {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(1 - exp(t)) for t <= 0, with log(0) = -inf when t == 0.
double log1m_exp(double t) {
  if (t >= 0.0) return kNegInf;
  return t > -M_LN2 ? std::log(-std::expm1(t)) : std::log1p(-std::exp(t));
}
}  // namespace

Chain dram_sample(const LogDensity& log_density, const Box& box, const McmcConfig& config) {
  const int d = box.dim();
  McmcConfig cfg = config;
  if (cfg.burn_in < 0) cfg.burn_in = cfg.n_steps / 5;
  if (cfg.init.size() == 0) cfg.init = 0.5 * (box.lo + box.hi);
  if (cfg.thin < 1) throw std::invalid_argument("dram_sample: thin must be >= 1");
  if (cfg.burn_in >= cfg.n_steps) throw std::invalid_argument("dram_sample: burn_in >= n_steps");
  if (!box.contains(cfg.init)) throw std::invalid_argument("dram_sample: init outside box");

  const double sd = 2.38 * 2.38 / static_cast<double>(d);
  Eigen::MatrixXd proposal_cov = cfg.init_proposal_cov;
  if (proposal_cov.size() == 0) {
    Eigen::VectorXd w = 0.1 * (box.hi - box.lo);
    proposal_cov = (sd * w.array().square()).matrix().asDiagonal();
  }
  Eigen::LLT<Eigen::MatrixXd> chol(proposal_cov);
  if (chol.info() != Eigen::Success) {
    throw std::invalid_argument("dram_sample: initial proposal covariance not SPD");
  }

  Eigen::VectorXd x = cfg.init;
  double lx = log_density(x);
  if (!std::isfinite(lx)) {
    throw std::invalid_argument("dram_sample: log-density not finite at the initial point");
  }

  Rng rng(cfg.seed);
  auto draw_step = [&](const Eigen::MatrixXd& lfac, double scale) {
    Eigen::VectorXd z(d);
    for (int i = 0; i < d; ++i) z[i] = rng.normal();
    return Eigen::VectorXd(scale * (lfac * z));
  };
  auto target = [&](const Eigen::VectorXd& p) { return box.contains(p) ? log_density(p) : kNegInf; };

  // log N(b; a, C) up to the common normalization, via the current factor
  Eigen::MatrixXd lfac = chol.matrixL();
  auto log_q = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b, double scale) {
    const Eigen::VectorXd u = lfac.triangularView<Eigen::Lower>().solve(b - a) / scale;
    return -0.5 * u.squaredNorm();
  };

  const int n_retained = (cfg.n_steps - cfg.burn_in) / cfg.thin;
  Chain chain;
  chain.config = cfg;
  chain.samples.resize(n_retained, d);
  chain.log_densities.resize(n_retained);

  // running moments for adaptation
  Eigen::VectorXd run_mean = x;
  Eigen::MatrixXd run_m2 = Eigen::MatrixXd::Zero(d, d);
  long long n_seen = 1;

  long long accepted = 0;
  long long consecutive_rejects = 0;
  const long long stall_limit = 10LL * d * 1000LL;
  int stored = 0;

  for (int step = 0; step < cfg.n_steps; ++step) {
    const Eigen::VectorXd y1 = x + draw_step(lfac, 1.0);
    const double ly1 = target(y1);
    bool moved = false;

    const double log_a1 = ly1 - lx;  // symmetric first-stage proposal
    if (ly1 > kNegInf && std::log(rng.uniform_open()) < log_a1) {
      x = y1;
      lx = ly1;
      moved = true;
    } else {
      // one delayed-rejection stage with a shrunk proposal
      const Eigen::VectorXd y2 = x + draw_step(lfac, cfg.dr_scale);
      const double ly2 = target(y2);
      if (ly2 > kNegInf) {
        const double log_a1_rev = std::min(0.0, ly1 - ly2);  // alpha1(y2, y1)
        const double log_num = ly2 + log_q(y2, y1, 1.0) + log1m_exp(log_a1_rev);
        const double log_den = lx + log_q(x, y1, 1.0) + log1m_exp(std::min(0.0, log_a1));
        if (std::log(rng.uniform_open()) < log_num - log_den) {
          x = y2;
          lx = ly2;
          moved = true;
        }
      }
    }

    if (moved) {
      ++accepted;
      consecutive_rejects = 0;
    } else if (++consecutive_rejects >= stall_limit) {
      std::ostringstream msg;
      msg << "dram_sample: " << consecutive_rejects << " consecutive rejections at step " << step
          << " (log-density " << lx << ", acceptance so far "
          << static_cast<double>(accepted) / (step + 1) << ")";
      throw std::runtime_error(msg.str());
    }

    // Welford update of the chain mean/covariance
    ++n_seen;
    const Eigen::VectorXd delta = x - run_mean;
    run_mean += delta / static_cast<double>(n_seen);
    run_m2 += delta * (x - run_mean).transpose();

    if (step + 1 >= cfg.adapt_start && (step + 1) % cfg.adapt_interval == 0) {
      Eigen::MatrixXd cov = run_m2 / static_cast<double>(n_seen - 1);
      cov = sd * cov + sd * cfg.cov_epsilon * Eigen::MatrixXd::Identity(d, d);
      Eigen::LLT<Eigen::MatrixXd> next(cov);
      if (next.info() == Eigen::Success) lfac = next.matrixL();
    }

    if (step >= cfg.burn_in && (step - cfg.burn_in) % cfg.thin == 0 && stored < n_retained) {
      chain.samples.row(stored) = x;
      chain.log_densities[stored] = lx;
      ++stored;
    }
  }

  chain.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(cfg.n_steps);
  return chain;
}

}  // namespace hiercal
