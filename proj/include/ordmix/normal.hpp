#pragma once

// Univariate standard-normal functions used by the truncated samplers: CDF and
// survival function, their logarithms far into the tails, the quantile
// function, and log-probabilities of intervals.

#include <cmath>
#include <limits>

namespace ordmix {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kSqrt1_2 = 0.70710678118654752440084436210485;
inline constexpr double kHalfLog2Pi = 0.91893853320467274178032973640562;

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x - kHalfLog2Pi); }

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * kSqrt1_2); }

/// Upper tail 1 - Phi(x), accurate for large positive x.
inline double norm_sf(double x) { return 0.5 * std::erfc(x * kSqrt1_2); }

/// log(1 - Phi(x)); finite for every finite x.
inline double log_norm_sf(double x) {
  if (x == kInf) return -kInf;
  if (x < 30.0) return std::log(norm_sf(x));
  // Asymptotic expansion of the Mills ratio; truncation error < 1e-13 at x >= 30.
  const double r = 1.0 / (x * x);
  const double series = 1.0 - r * (1.0 - r * (3.0 - r * (15.0 - r * (105.0 - r * 945.0))));
  return -0.5 * x * x - std::log(x) - kHalfLog2Pi + std::log(series);
}

inline double log_norm_cdf(double x) { return log_norm_sf(-x); }

/// Inverse of Phi on (0, 1) (Wichura's AS 241, relative accuracy ~1e-16).
inline double norm_quantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r + 6.7265770927008700853e+4) * r +
             4.5921953931549871457e+4) * r + 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r + 3.9307895800092710610e+4) * r +
             2.1213794301586595867e+4) * r + 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
             1.27045825245236838258e0) * r + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
             1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
             2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
             7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return q < 0.0 ? -val : val;
}

/// log P(lo < X <= hi) for X ~ N(0, 1); requires lo < hi. Works in the tail
/// the interval lives in, so probabilities far below DBL_MIN stay finite.
inline double log_interval_prob(double lo, double hi) {
  if (lo >= 0.0) {
    const double la = log_norm_sf(lo);
    const double lb = log_norm_sf(hi);
    return la + std::log1p(-std::exp(lb - la));
  }
  if (hi <= 0.0) return log_interval_prob(-hi, -lo);
  return std::log1p(-(norm_sf(hi) + norm_sf(-lo)));
}

}  // namespace ordmix
