#pragma once

// Matrix-variate normal distribution MN(M, Sigma, Phi) over J x T matrices:
// Sigma (J x J) carries covariances between variables, Phi (T x T) between
// time occasions, and vec(Z) ~ N(vec(M), kron(Phi, Sigma)) with column-stacking
// vec, i.e. entry (j, t) lands at position t*J + j (0-based).

#include "ordmix/linalg.hpp"
#include "ordmix/rng.hpp"

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ordmix {

/// Parameters of one mixture component.
struct ClusterParams {
  Matrix mean;      // J x T
  Matrix time_cov;  // T x T, SPD
  Matrix var_cov;   // J x J, SPD

  Eigen::Index n_vars() const { return mean.rows(); }
  Eigen::Index n_times() const { return mean.cols(); }

  /// Throws std::invalid_argument on shape/symmetry violations and
  /// NumericalError when a covariance does not factorize.
  void validate() const {
    const auto j = mean.rows(), t = mean.cols();
    if (j < 1 || t < 1) throw std::invalid_argument("ClusterParams: empty mean matrix");
    if (!mean.allFinite()) throw std::invalid_argument("ClusterParams: non-finite mean entries");
    if (time_cov.rows() != t || time_cov.cols() != t)
      throw std::invalid_argument("ClusterParams: time covariance must be T x T");
    if (var_cov.rows() != j || var_cov.cols() != j)
      throw std::invalid_argument("ClusterParams: variable covariance must be J x J");
    if (!is_symmetric(time_cov) || !is_symmetric(var_cov))
      throw std::invalid_argument("ClusterParams: covariance is not symmetric");
    cholesky_lower(time_cov);
    cholesky_lower(var_cov);
  }
};

// ---------------------------------------------------------------------------
// vec / unvec

inline Vector vec(const Matrix& z) { return Eigen::Map<const Vector>(z.data(), z.size()); }

inline Matrix unvec(const Vector& v, Eigen::Index j, Eigen::Index t) {
  if (j < 1 || t < 1 || v.size() != j * t) throw std::invalid_argument("unvec: length is not J*T");
  return Eigen::Map<const Matrix>(v.data(), j, t);
}

/// 0-based position of entry (j, t) in vec(Z).
constexpr Eigen::Index vec_index(Eigen::Index j, Eigen::Index t, Eigen::Index n_vars) { return t * n_vars + j; }

// ---------------------------------------------------------------------------

/// kron(Phi, Sigma): the covariance of vec(Z).
inline Matrix kron_cov(const Matrix& time_cov, const Matrix& var_cov) {
  const auto t = time_cov.rows(), j = var_cov.rows();
  Matrix out(j * t, j * t);
  for (Eigen::Index s = 0; s < t; ++s)
    for (Eigen::Index u = 0; u < t; ++u) out.block(s * j, u * j, j, j) = time_cov(s, u) * var_cov;
  return out;
}

/// Cached Cholesky factors of one component, reused across many densities.
class MatrixNormalFactor {
 public:
  explicit MatrixNormalFactor(const ClusterParams& p)
      : mean_(p.mean),
        chol_time_(cholesky_lower(p.time_cov)),
        chol_var_(cholesky_lower(p.var_cov)) {
    const double j = static_cast<double>(p.n_vars()), t = static_cast<double>(p.n_times());
    log_norm_const_ = -0.5 * j * t * kLog2Pi - 0.5 * j * log_det_from_cholesky(chol_time_) -
                      0.5 * t * log_det_from_cholesky(chol_var_);
  }

  double log_density(const Matrix& z) const {
    if (z.rows() != mean_.rows() || z.cols() != mean_.cols())
      throw std::invalid_argument("log_density: dimension mismatch");
    // tr(Sigma^-1 R Phi^-1 R') = || L_Sigma^-1 R L_Phi^-T ||_F^2
    Matrix a = chol_var_.triangularView<Eigen::Lower>().solve(z - mean_);
    Matrix bt = chol_time_.triangularView<Eigen::Lower>().solve(a.transpose());
    return log_norm_const_ - 0.5 * bt.squaredNorm();
  }

  const Matrix& chol_time() const { return chol_time_; }
  const Matrix& chol_var() const { return chol_var_; }
  const Matrix& mean() const { return mean_; }

 private:
  Matrix mean_;
  Matrix chol_time_;
  Matrix chol_var_;
  double log_norm_const_ = 0.0;
};

/// log f(Z | M, Phi, Sigma) of the matrix-variate normal.
inline double log_density(const Matrix& z, const ClusterParams& p) { return MatrixNormalFactor(p).log_density(z); }

/// Dense multivariate normal log-density; used for the vectorized route.
inline double mvn_log_density(const Vector& x, const Vector& mean, const Matrix& cov) {
  if (x.size() != mean.size() || cov.rows() != x.size()) throw std::invalid_argument("mvn_log_density: dimension mismatch");
  const Matrix l = cholesky_lower(cov);
  const Vector w = l.triangularView<Eigen::Lower>().solve(x - mean);
  return -0.5 * static_cast<double>(x.size()) * kLog2Pi - 0.5 * log_det_from_cholesky(l) - 0.5 * w.squaredNorm();
}

/// One draw Z = M + L_Sigma E L_Phi' with E iid standard normal.
inline Matrix sample(const ClusterParams& p, Stream& rng) {
  const Matrix lt = cholesky_lower(p.time_cov);
  const Matrix lv = cholesky_lower(p.var_cov);
  Matrix e(p.n_vars(), p.n_times());
  for (Eigen::Index t = 0; t < e.cols(); ++t)
    for (Eigen::Index j = 0; j < e.rows(); ++j) e(j, t) = rng.normal();
  return p.mean + lv * e * lt.transpose();
}

/// Rescales (Phi, Sigma) -> (Phi / c, Sigma * c) with c = tr(Phi) / T so that
/// tr(Phi') = T. The distribution is unchanged; returns (params', c).
inline std::pair<ClusterParams, double> normalize_scale(const ClusterParams& p) {
  const double c = p.time_cov.trace() / static_cast<double>(p.n_times());
  ClusterParams out{p.mean, p.time_cov / c, p.var_cov * c};
  return {std::move(out), c};
}

/// Free parameters of a K-component mixture with separable covariances.
constexpr std::int64_t param_count(std::int64_t k, std::int64_t j, std::int64_t t) {
  return k * (1 + j * t + j * (j + 1) / 2 + t * (t + 1) / 2) - 1;
}

}  // namespace ordmix
