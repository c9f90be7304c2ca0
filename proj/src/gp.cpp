#include "hiercal/gp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "hiercal/optim.hpp"
#include "hiercal/rng.hpp"

namespace hiercal {

namespace {
constexpr double kSqrt5 = 2.23606797749978969640917366873;
}

double matern52(double d, double variance, double lengthscale) {
  if (!(std::isfinite(d) && std::isfinite(variance) && std::isfinite(lengthscale)) || d < 0.0 ||
      variance <= 0.0 || lengthscale <= 0.0) {
    throw std::invalid_argument("matern52: invalid inputs");
  }
  const double t = kSqrt5 * d / lengthscale;
  return variance * (1.0 + t + t * t / 3.0) * std::exp(-t);
}

namespace {

// Per-dimension squared differences, computed once per training set; every
// hyperparameter evaluation only rescales them.
std::vector<Eigen::MatrixXd> squared_diffs(const Eigen::MatrixXd& x) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  std::vector<Eigen::MatrixXd> out(d);
  for (int k = 0; k < d; ++k) {
    out[k].resize(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        const double diff = x(i, k) - x(j, k);
        out[k](i, j) = out[k](j, i) = diff * diff;
      }
    }
  }
  return out;
}

Eigen::MatrixXd kernel_matrix(const std::vector<Eigen::MatrixXd>& sq, double variance,
                              const Eigen::VectorXd& ls, double nugget) {
  const int n = static_cast<int>(sq.front().rows());
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < sq.size(); ++k) d2 += sq[k] / (ls[k] * ls[k]);
  Eigen::MatrixXd km(n, n);
  for (int i = 0; i < n; ++i) {
    km(i, i) = variance + nugget;
    for (int j = 0; j < i; ++j) {
      const double t = kSqrt5 * std::sqrt(d2(i, j));
      km(i, j) = km(j, i) = variance * (1.0 + t + t * t / 3.0) * std::exp(-t);
    }
  }
  return km;
}

// -log marginal likelihood; +inf when the Cholesky fails at this nugget.
double negative_lml(const std::vector<Eigen::MatrixXd>& sq, const Eigen::VectorXd& resid,
                    double variance, const Eigen::VectorXd& ls, double nugget) {
  const Eigen::MatrixXd km = kernel_matrix(sq, variance, ls, nugget);
  Eigen::LLT<Eigen::MatrixXd> llt(km);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(resid.size());
  const Eigen::VectorXd alpha = llt.solve(resid);
  double logdet = 0.0;
  for (int i = 0; i < resid.size(); ++i) logdet += std::log(llt.matrixL()(i, i));
  logdet *= 2.0;
  return 0.5 * resid.dot(alpha) + 0.5 * logdet + 0.5 * n * std::log(2.0 * M_PI);
}

}  // namespace

void GpSurrogate::factorize() {
  const auto sq = squared_diffs(inputs_);
  double nugget = params_.nugget;
  while (true) {
    const Eigen::MatrixXd km =
        kernel_matrix(sq, params_.variance, params_.lengthscales, nugget);
    llt_.compute(km);
    if (llt_.info() == Eigen::Success) break;
    if (nugget >= 1e-4) {
      std::ostringstream msg;
      msg << "GpSurrogate: kernel matrix not SPD at nugget " << nugget << " (n="
          << inputs_.rows() << ", variance=" << params_.variance << ")";
      throw std::runtime_error(msg.str());
    }
    nugget *= 10.0;
  }
  params_.nugget = nugget;
  const Eigen::VectorXd resid = targets_.array() - mean_;
  alpha_ = llt_.solve(resid);
  double logdet = 0.0;
  for (int i = 0; i < targets_.size(); ++i) logdet += std::log(llt_.matrixL()(i, i));
  lml_ = -0.5 * resid.dot(alpha_) - logdet -
         0.5 * static_cast<double>(targets_.size()) * std::log(2.0 * M_PI);
}

GpSurrogate GpSurrogate::from_params(const Eigen::MatrixXd& inputs,
                                     const Eigen::VectorXd& targets, const KernelParams& params,
                                     double prior_mean) {
  GpSurrogate gp;
  gp.inputs_ = inputs;
  gp.targets_ = targets;
  gp.params_ = params;
  gp.mean_ = prior_mean;
  gp.factorize();
  return gp;
}

GpSurrogate GpSurrogate::fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                             const GpFitConfig& cfg) {
  const int n = static_cast<int>(inputs.rows());
  const int d = static_cast<int>(inputs.cols());
  if (n < 2) throw std::invalid_argument("GpSurrogate::fit: need at least 2 training points");
  if (targets.size() != n) throw std::invalid_argument("GpSurrogate::fit: size mismatch");

  const double mean = targets.mean();
  const Eigen::VectorXd resid = targets.array() - mean;
  const double var_z =
      n > 1 ? resid.squaredNorm() / static_cast<double>(n - 1) : 0.0;
  const double var_hi = std::max(100.0 * var_z, 1e-3);

  const auto sq = squared_diffs(inputs);

  // search in log space: (log variance, log lengthscales)
  Eigen::VectorXd lo(d + 1), hi(d + 1);
  lo[0] = std::log(cfg.variance_lo);
  hi[0] = std::log(var_hi);
  for (int k = 0; k < d; ++k) {
    lo[k + 1] = std::log(cfg.lengthscale_lo);
    hi[k + 1] = std::log(cfg.lengthscale_hi);
  }

  double best_val = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_u;
  double nugget = cfg.base_nugget;
  while (true) {
    auto objective = [&](const Eigen::VectorXd& u) {
      const double variance = std::exp(u[0]);
      Eigen::VectorXd ls = u.tail(d).array().exp();
      return negative_lml(sq, resid, variance, ls, nugget);
    };
    const Design starts = lhs_design(cfg.multistarts, d + 1, mix_seed(cfg.seed, 0x69f17ULL));
    for (int sidx = 0; sidx < cfg.multistarts; ++sidx) {
      Eigen::VectorXd u0 =
          lo.array() + starts.points.row(sidx).transpose().array() * (hi - lo).array();
      optim::NelderMeadOptions nm;
      nm.max_evals = cfg.max_evals_per_start;
      const auto res = optim::nelder_mead_min(objective, lo, hi, u0, nm);
      if (res.value < best_val) {
        best_val = res.value;
        best_u = res.x;
      }
    }
    if (std::isfinite(best_val) || nugget >= cfg.max_nugget) break;
    nugget *= 10.0;  // every start failed to factorize, escalate and retry
  }
  if (!std::isfinite(best_val)) {
    throw std::runtime_error("GpSurrogate::fit: no factorizable hyperparameters found");
  }

  KernelParams params;
  params.variance = std::exp(best_u[0]);
  params.lengthscales = best_u.tail(d).array().exp();
  params.nugget = nugget;

  GpSurrogate gp;
  gp.inputs_ = inputs;
  gp.targets_ = targets;
  gp.params_ = params;
  gp.mean_ = mean;
  gp.factorize();
  return gp;
}

std::pair<double, double> GpSurrogate::predict(const Eigen::VectorXd& lambda) const {
  const int n = static_cast<int>(inputs_.rows());
  const Eigen::VectorXd& ls = params_.lengthscales;
  Eigen::VectorXd kvec(n);
  for (int i = 0; i < n; ++i) {
    double d2 = 0.0;
    for (int k = 0; k < lambda.size(); ++k) {
      const double diff = (lambda[k] - inputs_(i, k)) / ls[k];
      d2 += diff * diff;
    }
    const double t = kSqrt5 * std::sqrt(d2);
    kvec[i] = params_.variance * (1.0 + t + t * t / 3.0) * std::exp(-t);
  }
  const double mean = mean_ + kvec.dot(alpha_);
  const Eigen::VectorXd w = llt_.matrixL().solve(kvec);
  const double var = std::max(0.0, params_.variance - w.squaredNorm());
  return {mean, var};
}

void SurrogateSet::insert(int t, int point, GpSurrogate gp) {
  surrogates_.insert_or_assign({t, point}, std::move(gp));
}

const GpSurrogate& SurrogateSet::at(int t, int point) const {
  const auto it = surrogates_.find({t, point});
  if (it == surrogates_.end()) {
    throw std::out_of_range("SurrogateSet: no surrogate for requested (output, point)");
  }
  return it->second;
}

bool SurrogateSet::contains(int t, int point) const {
  return surrogates_.count({t, point}) > 0;
}

SurrogateSet fit_surrogates(const CalibrationProblem& problem, const Eigen::MatrixXd& points,
                            int n_train, const GpFitConfig& cfg, std::uint64_t train_design_seed,
                            int threads, EvalCounter* counter) {
  const int n_pts = static_cast<int>(points.rows());
  const Design train = lhs_design(n_train, problem.param_dim, train_design_seed);

  // one code run per (x, lambda) pair yields all outputs
  std::vector<Eigen::MatrixXd> responses(n_pts);  // n_train×T each
  for (int r = 0; r < n_pts; ++r) {
    responses[r].resize(n_train, problem.output_dim);
    for (int i = 0; i < n_train; ++i) {
      responses[r].row(i) = problem.simulator(points.row(r), train.points.row(i));
      if (counter != nullptr) counter->add(RunChannel::simulator);
    }
  }

  struct Job {
    int t, point;
  };
  std::vector<Job> jobs;
  for (int t = 0; t < problem.output_dim; ++t) {
    for (int r = 0; r < n_pts; ++r) jobs.push_back({t, r});
  }

  std::vector<std::optional<GpSurrogate>> fitted(jobs.size());
  auto run_job = [&](std::size_t idx) {
    const auto [t, r] = jobs[idx];
    GpFitConfig local = cfg;
    local.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(t),
                          static_cast<std::uint64_t>(r));
    fitted[idx] = GpSurrogate::fit(train.points, responses[r].col(t), local);
  };

  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> workers;
    const int n_workers = std::min<int>(threads, static_cast<int>(jobs.size()));
    for (int w = 0; w < n_workers; ++w) {
      workers.push_back(std::async(std::launch::async, [&] {
        for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
          run_job(i);
        }
      }));
    }
    for (auto& f : workers) f.get();
  }

  SurrogateSet set;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    set.insert(jobs[i].t, jobs[i].point, std::move(*fitted[i]));
  }
  return set;
}

}  // namespace hiercal
