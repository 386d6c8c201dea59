#pragma once

// Box-truncated multivariate normal machinery:
//   * univariate truncated-normal draws, robust far into the tails;
//   * a systematic-scan Gibbs sampler for N(mean, cov) restricted to a box;
//   * Monte-Carlo first and second moments from the retained Gibbs states;
//   * a sequential (separation-of-variables) estimator of the box probability
//     accumulated in log space.

#include "ordmix/linalg.hpp"
#include "ordmix/normal.hpp"
#include "ordmix/ordinal.hpp"
#include "ordmix/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ordmix {

struct GibbsConfig {
  int burn_in = 100;    // sweeps discarded before the first retained state
  int thinning = 2;     // sweeps between retained states
  int n_samples = 100;  // retained (post-thinning) states

  void validate() const {
    if (burn_in < 0 || thinning < 1 || n_samples < 1) throw std::invalid_argument("GibbsConfig: invalid settings");
  }
};

struct MomentEstimates {
  Vector m;   // E[z]
  Matrix s;   // E[z z']
  int n_used = 0;
};

struct ProbEstimate {
  double log_prob = 0.0;
  double std_error = 0.0;  // standard error of log_prob (delta method)
  int n_points = 0;
};

namespace detail {

// Standard normal restricted to (lo, hi] with lo >= 6: truncated-exponential
// proposal with rate lo, accepted with probability exp(-e^2 / 2).
inline double far_tail_draw(double lo, double hi, Stream& rng) {
  const double mass = -std::expm1(-lo * (hi - lo));  // 1 for hi = +inf
  for (;;) {
    const double e = -std::log1p(-rng.uniform() * mass) / lo;
    if (rng.uniform() <= std::exp(-0.5 * e * e)) return std::min(lo + e, hi);
  }
}

// Draw from N(0,1) restricted to (lo, hi]; when `log_p` is non-null also
// stores log P(lo < X <= hi) computed from the same tail quantities.
inline double std_truncnorm(double lo, double hi, Stream& rng, double* log_p = nullptr) {
  constexpr double kTail = 6.0;
  double x;
  if (lo >= kTail) {
    if (log_p) *log_p = log_interval_prob(lo, hi);
    x = far_tail_draw(lo, hi, rng);
  } else if (hi <= -kTail) {
    if (log_p) *log_p = log_interval_prob(lo, hi);
    x = -far_tail_draw(-hi, -lo, rng);
  } else if (lo >= 0.0) {
    const double qa = norm_sf(lo), qb = norm_sf(hi);
    const double p = qa - qb;
    if (log_p) *log_p = std::log(p);
    x = -norm_quantile(qa - rng.uniform() * p);
  } else {
    const double pa = norm_cdf(lo), pb = norm_cdf(hi);
    const double p = pb - pa;
    if (log_p) *log_p = (hi > 0.0) ? std::log1p(-(norm_sf(hi) + pa)) : std::log(p);
    x = norm_quantile(pa + rng.uniform() * p);
  }
  if (!(x > lo)) x = std::nextafter(lo, kInf);
  if (x > hi) x = hi;
  return x;
}

// Keep a transformed draw inside (a, b] despite rounding.
inline double clamp_open_closed(double z, double a, double b) {
  if (!(z > a)) z = std::nextafter(a, kInf);
  if (z > b) z = b;
  return z;
}

}  // namespace detail

/// One draw from N(mu, sd^2) conditioned on (a, b].
inline double sample_univ_truncnorm(double mu, double sd, double a, double b, Stream& rng) {
  if (!(a < b)) throw std::invalid_argument("sample_univ_truncnorm: need a < b");
  if (!(sd > 0.0)) throw std::invalid_argument("sample_univ_truncnorm: sd must be positive");
  const double x = detail::std_truncnorm((a - mu) / sd, (b - mu) / sd, rng);
  return detail::clamp_open_closed(mu + sd * x, a, b);
}

/// Gibbs sampler for N(mean, cov) truncated to a box. The full conditionals
/// come from the precision matrix and are computed once per (mean, cov), so a
/// single sampler serves every unit of a cluster.
class TruncatedMvnSampler {
 public:
  struct FromPrecision {};

  TruncatedMvnSampler(Vector mean, const Matrix& cov) : TruncatedMvnSampler(FromPrecision{}, std::move(mean), spd_inverse(cov)) {}

  TruncatedMvnSampler(FromPrecision, Vector mean, const Matrix& precision)
      : mean_(std::move(mean)), n_(mean_.size()), coef_(n_ * n_), cond_sd_(n_) {
    if (precision.rows() != n_ || precision.cols() != n_) throw std::invalid_argument("TruncatedMvnSampler: dimension mismatch");
    for (Eigen::Index d = 0; d < n_; ++d) {
      const double q = precision(d, d);
      if (!(q > 0.0)) throw NumericalError("TruncatedMvnSampler: non-positive precision diagonal");
      cond_sd_[static_cast<std::size_t>(d)] = 1.0 / std::sqrt(q);
      for (Eigen::Index l = 0; l < n_; ++l)
        coef_[static_cast<std::size_t>(d * n_ + l)] = (l == d) ? 0.0 : -precision(d, l) / q;
    }
  }

  Eigen::Index dim() const { return n_; }
  const Vector& mean() const { return mean_; }

  /// Retained states as columns (dim x n_samples).
  Matrix run(const Box& box, const GibbsConfig& cfg, Stream& rng) const {
    cfg.validate();
    if (box.dim() != n_) throw std::invalid_argument("gibbs: box dimension mismatch");
    box.check();
    std::vector<double> z(static_cast<std::size_t>(n_)), r(static_cast<std::size_t>(n_));
    for (Eigen::Index d = 0; d < n_; ++d) {
      const double a = box.lower[d], b = box.upper[d];
      double c;
      if (std::isfinite(a) && std::isfinite(b)) c = 0.5 * (a + b);
      else if (std::isfinite(a)) c = a + 0.5;
      else if (std::isfinite(b)) c = b - 0.5;
      else c = mean_[d];
      z[static_cast<std::size_t>(d)] = c;
      r[static_cast<std::size_t>(d)] = c - mean_[d];
    }
    Matrix kept(n_, cfg.n_samples);
    const long total = static_cast<long>(cfg.burn_in) + static_cast<long>(cfg.thinning) * cfg.n_samples;
    int n_kept = 0;
    for (long sweep = 1; sweep <= total; ++sweep) {
      for (Eigen::Index d = 0; d < n_; ++d) {
        const double* row = coef_.data() + d * n_;
        double cm = 0.0;
        for (Eigen::Index l = 0; l < n_; ++l) cm += row[l] * r[static_cast<std::size_t>(l)];
        cm += mean_[d];
        const double sd = cond_sd_[static_cast<std::size_t>(d)];
        const double a = box.lower[d], b = box.upper[d];
        const double x = detail::std_truncnorm((a - cm) / sd, (b - cm) / sd, rng);
        const double zd = detail::clamp_open_closed(cm + sd * x, a, b);
        z[static_cast<std::size_t>(d)] = zd;
        r[static_cast<std::size_t>(d)] = zd - mean_[d];
      }
      if (sweep > cfg.burn_in && (sweep - cfg.burn_in) % cfg.thinning == 0)
        kept.col(n_kept++) = Eigen::Map<const Vector>(z.data(), n_);
    }
    return kept;
  }

  MomentEstimates moments(const Box& box, const GibbsConfig& cfg, Stream& rng) const {
    const Matrix x = run(box, cfg, rng);
    const double inv_n = 1.0 / static_cast<double>(x.cols());
    MomentEstimates out;
    out.m = x.rowwise().sum() * inv_n;
    out.s = Matrix::Zero(n_, n_);
    out.s.selfadjointView<Eigen::Lower>().rankUpdate(x, inv_n);
    out.s = out.s.selfadjointView<Eigen::Lower>();
    out.n_used = static_cast<int>(x.cols());
    return out;
  }

 private:
  Vector mean_;
  Eigen::Index n_;
  std::vector<double> coef_;     // row-major, -Q_dl / Q_dd, zero diagonal
  std::vector<double> cond_sd_;  // 1 / sqrt(Q_dd)
};

inline std::vector<Vector> gibbs_truncated_mvn(const Vector& mean, const Matrix& cov, const Box& box,
                                               const GibbsConfig& cfg, Stream& rng) {
  const Matrix x = TruncatedMvnSampler(mean, cov).run(box, cfg, rng);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index c = 0; c < x.cols(); ++c) out.emplace_back(x.col(c));
  return out;
}

inline MomentEstimates truncated_moments(const Vector& mean, const Matrix& cov, const Box& box, const GibbsConfig& cfg,
                                         Stream& rng) {
  return TruncatedMvnSampler(mean, cov).moments(box, cfg, rng);
}

namespace detail {

// frac(sqrt(p)) for the first n primes: generators of the Richtmyer lattice.
inline std::vector<double> richtmyer_generators(Eigen::Index n) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long c = 2; static_cast<Eigen::Index>(out.size()) < n; ++c) {
    bool prime = true;
    for (long f = 2; f * f <= c && prime; ++f) prime = (c % f) != 0;
    if (prime) {
      const double r = std::sqrt(static_cast<double>(c));
      out.push_back(r - std::floor(r));
    }
  }
  return out;
}

}  // namespace detail

/// Sequential conditioning estimator of P(X in box), X ~ N(mean, cov). Each
/// point draws the Cholesky-whitened coordinates one at a time from their
/// conditional interval by inversion and carries the product of interval
/// probabilities as a log weight. Points come from a randomized lattice:
/// 8 independent random shifts, each with antithetic pairs, so the standard
/// error is estimated from the spread between shifts.
class BoxProbabilityEstimator {
 public:
  static constexpr int kShifts = 8;

  BoxProbabilityEstimator(Vector mean, const Matrix& cov)
      : mean_(std::move(mean)),
        n_(mean_.size()),
        chol_(static_cast<std::size_t>(n_ * n_)),
        diag_(static_cast<std::size_t>(n_)),
        gen_(detail::richtmyer_generators(n_)) {
    if (cov.rows() != n_ || cov.cols() != n_) throw std::invalid_argument("box_probability: dimension mismatch");
    const Matrix l = cholesky_lower(cov);
    for (Eigen::Index d = 0; d < n_; ++d) {
      diag_[static_cast<std::size_t>(d)] = l(d, d);
      for (Eigen::Index c = 0; c < n_; ++c) chol_[static_cast<std::size_t>(d * n_ + c)] = l(d, c);
    }
  }

  /// Uses about n_points points (rounded up to a multiple of 2 * kShifts
  /// once n_points >= 2 * kShifts); the count actually used is reported.
  ProbEstimate estimate(const Box& box, int n_points, Stream& rng) const {
    if (n_points < 1) throw std::invalid_argument("box_probability: n_points must be positive");
    if (box.dim() != n_) throw std::invalid_argument("box_probability: box dimension mismatch");
    box.check();
    bool unbounded = true;
    for (Eigen::Index d = 0; d < n_ && unbounded; ++d)
      unbounded = std::isinf(box.lower[d]) && std::isinf(box.upper[d]);
    if (unbounded) return {0.0, 0.0, n_points};

    const int shifts = n_points >= 2 * kShifts ? kShifts : 1;
    const int pairs = std::max(1, (n_points + 2 * shifts - 1) / (2 * shifts));
    std::vector<double> a(static_cast<std::size_t>(n_)), b(static_cast<std::size_t>(n_)), y(static_cast<std::size_t>(n_));
    std::vector<double> shift(static_cast<std::size_t>(n_)), u(static_cast<std::size_t>(n_)), ua(static_cast<std::size_t>(n_));
    for (Eigen::Index d = 0; d < n_; ++d) {
      a[static_cast<std::size_t>(d)] = box.lower[d] - mean_[d];
      b[static_cast<std::size_t>(d)] = box.upper[d] - mean_[d];
    }
    std::vector<double> logw(static_cast<std::size_t>(shifts * pairs * 2));
    std::size_t w = 0;
    for (int sft = 0; sft < shifts; ++sft) {
      for (auto& v : shift) v = rng.uniform();
      for (int p = 1; p <= pairs; ++p) {
        for (std::size_t d = 0; d < static_cast<std::size_t>(n_); ++d) {
          double x = shift[d] + p * gen_[d];
          x -= std::floor(x);
          const double t = std::abs(2.0 * x - 1.0);  // tent (periodizing) transform
          u[d] = std::clamp(t, 0x1.0p-53, 1.0 - 0x1.0p-53);
          ua[d] = 1.0 - u[d];
        }
        logw[w++] = log_weight(a, b, y, u, rng);
        logw[w++] = log_weight(a, b, y, ua, rng);
      }
    }
    return summarize(logw, shifts);
  }

 private:
  double log_weight(const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& y,
                    const std::vector<double>& u, Stream& rng) const {
    constexpr double kFarTail = 37.0;  // norm_sf underflows soon after
    double lw = 0.0;
    for (Eigen::Index d = 0; d < n_; ++d) {
      const auto di = static_cast<std::size_t>(d);
      const double* row = chol_.data() + d * n_;
      double s = 0.0;
      for (Eigen::Index c = 0; c < d; ++c) s += row[c] * y[static_cast<std::size_t>(c)];
      const double ld = diag_[di];
      const double lo = (a[di] - s) / ld;
      const double hi = (b[di] - s) / ld;
      const bool last = d + 1 == n_;
      double lp, x;
      if (lo >= kFarTail || hi <= -kFarTail) {
        lp = log_interval_prob(lo, hi);
        x = last ? 0.0 : detail::std_truncnorm(lo, hi, rng);
      } else if (lo >= 0.0) {
        const double qa = norm_sf(lo), qb = norm_sf(hi), pr = qa - qb;
        lp = std::log(pr);
        x = last ? 0.0 : -norm_quantile(qa - u[di] * pr);
      } else {
        const double pa = norm_cdf(lo), pb = norm_cdf(hi), pr = pb - pa;
        lp = hi > 0.0 ? std::log1p(-(norm_sf(hi) + pa)) : std::log(pr);
        x = last ? 0.0 : norm_quantile(pa + u[di] * pr);
      }
      if (!last) {
        if (!(x > lo)) x = std::nextafter(lo, kInf);
        if (x > hi) x = hi;
        y[di] = x;
      }
      lw += lp;
    }
    return lw;
  }

  static ProbEstimate summarize(const std::vector<double>& logw, int shifts) {
    const int n_points = static_cast<int>(logw.size());
    const double mx = *std::max_element(logw.begin(), logw.end());
    if (!std::isfinite(mx)) return {-kInf, kInf, n_points};
    const std::size_t per = logw.size() / static_cast<std::size_t>(shifts);
    std::vector<double> shift_mean(static_cast<std::size_t>(shifts), 0.0);
    for (std::size_t i = 0; i < logw.size(); ++i) shift_mean[i / per] += std::exp(logw[i] - mx);
    double mean_w = 0.0;
    for (auto& v : shift_mean) mean_w += (v /= static_cast<double>(per));
    mean_w /= shifts;
    double var = 0.0;
    for (double v : shift_mean) var += (v - mean_w) * (v - mean_w);
    ProbEstimate out;
    out.log_prob = std::min(0.0, mx + std::log(mean_w));
    out.std_error = shifts > 1 ? std::sqrt(var / (shifts - 1) / shifts) / mean_w : 0.0;
    out.n_points = n_points;
    return out;
  }

  Vector mean_;
  Eigen::Index n_;
  std::vector<double> chol_;  // row-major lower factor
  std::vector<double> diag_;
  std::vector<double> gen_;
};

inline ProbEstimate box_probability(const Vector& mean, const Matrix& cov, const Box& box, int n_points, Stream& rng) {
  return BoxProbabilityEstimator(mean, cov).estimate(box, n_points, rng);
}

}  // namespace ordmix
