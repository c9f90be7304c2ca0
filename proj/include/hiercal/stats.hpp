#pragma once

#include <cmath>
#include <span>

#include "hiercal/rng.hpp"

namespace hiercal::stats {

inline constexpr double two_pi = 6.283185307179586476925286766559;

inline double norm_logpdf(double z) { return -0.5 * z * z - 0.5 * std::log(two_pi); }
inline double norm_pdf(double z) { return std::exp(norm_logpdf(z)); }

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

// log of the upper tail P(Z > z); stays finite far into the tail where
// erfc underflows.
double log_norm_cdf_upper(double z);

// Inverse standard normal CDF, full double precision over (0,1).
double norm_quantile(double p);

// Truncated normal N(mu, sigma^2) restricted to [lo, hi]. The normalization
// is computed tail-aware so that means far outside [lo, hi] (|mu| up to ~10
// with sigma 0.45) keep full relative accuracy.
double tn_log_norm_const(double mu, double sigma, double lo, double hi);
double tn_logpdf(double x, double mu, double sigma, double lo, double hi);
double tn_mean(double mu, double sigma, double lo, double hi);
double tn_sample(Rng& rng, double mu, double sigma, double lo, double hi);

double log_sum_exp(std::span<const double> v);
inline double log_mean_exp(std::span<const double> v) {
  return log_sum_exp(v) - std::log(static_cast<double>(v.size()));
}

double mean(std::span<const double> v);
double sample_variance(std::span<const double> v);  // 1/(n-1) convention

}  // namespace hiercal::stats
