#pragma once

// Dense linear-algebra helpers shared by every module: SPD factorization with
// a bounded jitter safeguard, symmetrization, and log-space reductions.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ordmix {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when a numerical procedure cannot continue (non-SPD covariance after
/// the jitter ladder, all-component underflow, persistent cluster collapse).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

inline Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

inline bool is_symmetric(const Matrix& a, double tol = 1e-10) {
  if (a.rows() != a.cols()) return false;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = j + 1; i < a.rows(); ++i)
      if (std::abs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

/// Lower Cholesky factor; throws NumericalError if `a` is not positive definite.
inline Matrix cholesky_lower(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("cholesky_lower: matrix is not square");
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw NumericalError("cholesky_lower: matrix is not positive definite");
  Matrix l = llt.matrixL();
  for (Eigen::Index i = 0; i < l.rows(); ++i)
    if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i)))
      throw NumericalError("cholesky_lower: matrix is not positive definite");
  return l;
}

/// log|A| from its lower Cholesky factor.
inline double log_det_from_cholesky(const Matrix& l) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

/// Inverse of an SPD matrix through its Cholesky factor, symmetrized.
inline Matrix spd_inverse(const Matrix& a) {
  const Matrix l = cholesky_lower(a);
  Matrix inv = Matrix::Identity(a.rows(), a.cols());
  l.triangularView<Eigen::Lower>().solveInPlace(inv);
  l.transpose().triangularView<Eigen::Upper>().solveInPlace(inv);
  return symmetrized(inv);
}

/// Returns `a` (symmetrized) if it factorizes, otherwise `a + eps*mean(diag)*I`
/// for eps = 1e-10, 1e-9, ..., 1e-6; throws NumericalError past the last rung.
inline Matrix make_spd(const Matrix& a) {
  Matrix s = symmetrized(a);
  if (!s.allFinite()) throw NumericalError("make_spd: non-finite covariance entries");
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() == Eigen::Success) return s;
  const double scale = std::max(std::abs(s.diagonal().mean()), std::numeric_limits<double>::min());
  for (double eps = 1e-10; eps <= 1e-6 * 1.0000001; eps *= 10.0) {
    Matrix jittered = s;
    jittered.diagonal().array() += eps * scale;
    llt.compute(jittered);
    if (llt.info() == Eigen::Success) return jittered;
  }
  throw NumericalError("make_spd: covariance is not positive definite after jitter");
}

/// Numerically stable log(sum(exp(x))). Returns -inf for an all -inf input.
inline double log_sum_exp(const double* x, std::size_t n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, x[i]);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i] - mx);
  return mx + std::log(s);
}

inline double log_sum_exp(const std::vector<double>& x) { return log_sum_exp(x.data(), x.size()); }

}  // namespace ordmix
