#include "hiercal/stats.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace hiercal::stats {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(la) - exp(lb)) for la > lb.
double log_diff_exp(double la, double lb) {
  if (lb == kNegInf) return la;
  return la + std::log1p(-std::exp(lb - la));
}
}  // namespace

double log_norm_cdf_upper(double z) {
  if (z < 8.0) {
    return std::log(0.5 * std::erfc(z * M_SQRT1_2));
  }
  const double e = std::erfc(z * M_SQRT1_2);
  if (e > 0.0) return std::log(0.5 * e);
  // erfc underflowed; two-term asymptotic expansion of the Mills ratio.
  const double z2 = z * z;
  return -0.5 * z2 - std::log(z) - 0.5 * std::log(two_pi) + std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("norm_quantile: p must be in (0,1)");
  }
  static const boost::math::normal_distribution<double> unit(0.0, 1.0);
  return boost::math::quantile(unit, p);
}

double tn_log_norm_const(double mu, double sigma, double lo, double hi) {
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  if (a > 0.0) {
    // both bounds in the upper tail
    return log_diff_exp(log_norm_cdf_upper(a), log_norm_cdf_upper(b));
  }
  if (b < 0.0) {
    // both bounds in the lower tail; mirror
    return log_diff_exp(log_norm_cdf_upper(-b), log_norm_cdf_upper(-a));
  }
  return std::log(norm_cdf(b) - norm_cdf(a));
}

double tn_logpdf(double x, double mu, double sigma, double lo, double hi) {
  if (x < lo || x > hi) return kNegInf;
  const double z = (x - mu) / sigma;
  return norm_logpdf(z) - std::log(sigma) - tn_log_norm_const(mu, sigma, lo, hi);
}

double tn_mean(double mu, double sigma, double lo, double hi) {
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  const double log_z = tn_log_norm_const(mu, sigma, lo, hi);
  const double lfa = norm_logpdf(a);
  const double lfb = norm_logpdf(b);
  if (lfa == lfb) return mu + 0.0;
  if (lfa > lfb) return mu + sigma * std::exp(log_diff_exp(lfa, lfb) - log_z);
  return mu - sigma * std::exp(log_diff_exp(lfb, lfa) - log_z);
}

double tn_sample(Rng& rng, double mu, double sigma, double lo, double hi) {
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  const double u = rng.uniform_open();
  double z;
  if (a > 0.0) {
    // map through the upper tail to avoid 1-p cancellation
    const double pa = 0.5 * std::erfc(a * M_SQRT1_2);
    const double pb = 0.5 * std::erfc(b * M_SQRT1_2);
    const double p = pa - u * (pa - pb);
    z = -norm_quantile(std::max(p, std::numeric_limits<double>::min()));
  } else if (b < 0.0) {
    const double pa = 0.5 * std::erfc(-b * M_SQRT1_2);
    const double pb = 0.5 * std::erfc(-a * M_SQRT1_2);
    const double p = pa - u * (pa - pb);
    z = norm_quantile(std::max(p, std::numeric_limits<double>::min()));
  } else {
    const double ca = norm_cdf(a);
    const double cb = norm_cdf(b);
    z = norm_quantile(std::clamp(ca + u * (cb - ca), std::numeric_limits<double>::min(),
                                 1.0 - std::numeric_limits<double>::epsilon()));
  }
  return std::clamp(mu + sigma * z, lo, hi);
}

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace hiercal::stats
