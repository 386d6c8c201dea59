#pragma once

// Competitors that ignore the ordinal nature of the data: a mixture of
// matrix-variate normals fitted to the integer levels as if they were
// continuous, and a full-covariance Gaussian mixture on vec(Y). Both use
// exact EM with the same stopping and degeneracy rules as the ordinal fit.

#include "ordmix/kmeans.hpp"
#include "ordmix/linalg.hpp"
#include "ordmix/matvar.hpp"
#include "ordmix/mom.hpp"
#include "ordmix/ordinal.hpp"
#include "ordmix/parallel.hpp"
#include "ordmix/rng.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ordmix {

/// Same layout as FitResult; model.thresholds is empty.
using MmnFitResult = FitResult;

struct GmmFitResult {
  std::vector<double> weights;
  std::vector<Vector> means;
  std::vector<Matrix> covs;
  Matrix tau;
  std::vector<int> labels;  // 1-based
  std::vector<double> loglik_trace;
  double bic = 0.0;
  int n_iter = 0;
  bool converged = false;
  std::uint64_t seed = 0;
};

inline std::int64_t gmm_param_count(int k, Eigen::Index dim) {
  return static_cast<std::int64_t>(k) * (1 + dim + dim * (dim + 1) / 2) - 1;
}

namespace detail {

inline std::vector<Matrix> real_units(const OrdinalDataset& ds) {
  std::vector<Matrix> out;
  out.reserve(ds.n_units());
  for (const auto& y : ds.units) out.push_back(as_real(y));
  return out;
}

inline Matrix stack_vec(const std::vector<Matrix>& data) {
  if (data.empty()) throw std::invalid_argument("mmn_fit: empty dataset");
  const Eigen::Index j = data.front().rows(), t = data.front().cols();
  Matrix x(j * t, static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].rows() != j || data[i].cols() != t) throw std::invalid_argument("mmn_fit: units differ in shape");
    if (!data[i].allFinite()) throw std::invalid_argument("mmn_fit: non-finite entry in unit " + std::to_string(i + 1));
    x.col(static_cast<Eigen::Index>(i)) = vec(data[i]);
  }
  return x;
}

/// Row-wise softmax of log p in place; returns the sum of the row log-sum-exps.
inline double normalize_rows(Matrix& lp) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < lp.rows(); ++i) {
    const double mx = lp.row(i).maxCoeff();
    if (!std::isfinite(mx)) throw NumericalError("e_step: every component underflows for unit " + std::to_string(i + 1));
    const double lse = mx + std::log((lp.row(i).array() - mx).exp().sum());
    lp.row(i) = (lp.row(i).array() - lse).exp();
    lp.row(i) /= lp.row(i).sum();
    total += lse;
  }
  return total;
}

inline bool stop_now(const std::vector<double>& trace, double tol) {
  const std::size_t s = trace.size();
  return s > 1 && std::abs(trace[s - 1] - trace[s - 2]) < tol;
}

inline FitResult mmn_fit_from(const std::vector<Matrix>& data, const Matrix& x, MixtureModel model, const FitConfig& cfg, int restart) {
  const std::size_t n = data.size();
  const Eigen::Index j = model.n_vars(), t = model.n_times();
  const int k = model.k();
  bool reseeded = false;
  FitResult res;
  res.seed = cfg.seed;
  res.restart = restart;
  Matrix tau;
  for (int iter = 0;; ++iter) {
    std::vector<MatrixNormalFactor> factors;
    for (const auto& p : model.components) factors.emplace_back(p);
    tau.resize(static_cast<Eigen::Index>(n), k);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
      for (int c = 0; c < k; ++c)
        tau(static_cast<Eigen::Index>(i), c) =
            std::log(model.weights[static_cast<std::size_t>(c)]) + factors[static_cast<std::size_t>(c)].log_density(data[i]);
    });
    res.loglik_trace.push_back(normalize_rows(tau));
    res.n_iter = iter;
    if (cfg.on_iteration) cfg.on_iteration(iter, res.loglik_trace.back());
    if (stop_now(res.loglik_trace, cfg.tol)) {
      res.converged = true;
      break;
    }
    if (iter >= cfg.max_iter) break;
    Matrix outer(j * t, j * t);
    std::size_t outer_unit = n;
    MStepOutcome o = m_step_from_moments(
        tau, model, cfg.min_cluster_mass, [](std::size_t, int) { return true; },
        [&](std::size_t i, int) { return x.col(static_cast<Eigen::Index>(i)); },
        [&](std::size_t i, int) -> const Matrix& {
          if (outer_unit != i) {
            outer.noalias() = x.col(static_cast<Eigen::Index>(i)) * x.col(static_cast<Eigen::Index>(i)).transpose();
            outer_unit = i;
          }
          return outer;
        });
    if (!o.degenerate.empty()) {
      if (reseeded)
        throw NumericalError("mmn_fit: cluster " + std::to_string(o.degenerate.front() + 1) +
                             " collapsed again after reseeding (k=" + std::to_string(k) + ")");
      reseeded = true;
      Stream rs = make_stream(cfg.seed, StreamTag::kReseed, {static_cast<std::uint64_t>(restart), static_cast<std::uint64_t>(iter)});
      reseed_clusters(o.model, o.degenerate, n, [&](std::size_t u) { return data[u]; }, rs);
    }
    model = std::move(o.model);
  }
  res.model = std::move(model);
  res.tau = std::move(tau);
  res.labels = classify(res.tau);
  res.bic = bic(res.loglik_trace.back(), k, j, t, n);
  return res;
}

}  // namespace detail

/// Mixture of matrix-variate normals on continuous J x T observations.
inline MmnFitResult mmn_fit(const std::vector<Matrix>& data, const FitConfig& cfg) {
  cfg.validate();
  const Matrix x = detail::stack_vec(data);
  if (cfg.k > x.cols()) throw std::invalid_argument("mmn_fit: k exceeds the number of units");
  const Eigen::Index j = data.front().rows(), t = data.front().cols();
  const int runs = cfg.init == InitMethod::kKmeansPlusPlus ? 1 : cfg.restarts;
  std::optional<FitResult> best;
  std::string last_error;
  for (int r = 0; r < runs; ++r) {
    Stream rs = make_stream(cfg.seed, StreamTag::kInit, {static_cast<std::uint64_t>(r)});
    MixtureModel start = init_from_points(x, j, t, cfg.k, cfg.init, rs, cfg.kmeans_iters);
    if (runs == 1) return detail::mmn_fit_from(data, x, std::move(start), cfg, r);
    try {
      FitResult f = detail::mmn_fit_from(data, x, std::move(start), cfg, r);
      if (!best || f.loglik_trace.back() > best->loglik_trace.back()) best = std::move(f);
    } catch (const NumericalError& e) {
      last_error = e.what();
    }
  }
  if (!best) throw NumericalError("mmn_fit: every random restart failed: " + last_error);
  return std::move(*best);
}

/// Ordinal levels treated as real numbers.
inline MmnFitResult mmn_fit(const OrdinalDataset& ds, const FitConfig& cfg) {
  require_valid(ds);
  return mmn_fit(detail::real_units(ds), cfg);
}

/// Full-covariance Gaussian mixture on the columns of `points`.
inline GmmFitResult gmm_fit(const Matrix& points, const FitConfig& cfg) {
  cfg.validate();
  const Eigen::Index dim = points.rows(), n = points.cols();
  const int k = cfg.k;
  if (n < 1 || dim < 1) throw std::invalid_argument("gmm_fit: empty data");
  if (k > n) throw std::invalid_argument("gmm_fit: k exceeds the number of points");
  if (!points.allFinite()) throw std::invalid_argument("gmm_fit: non-finite data");

  GmmFitResult res;
  res.seed = cfg.seed;
  Stream init = make_stream(cfg.seed, StreamTag::kInit, {0});
  const Matrix centers = kmeanspp(points, k, std::max(cfg.kmeans_iters, k == 1 ? 1 : 0), init);
  for (int c = 0; c < k; ++c) {
    res.means.push_back(centers.col(c));
    res.covs.push_back(Matrix::Identity(dim, dim));
  }
  res.weights.assign(static_cast<std::size_t>(k), 1.0 / k);

  bool reseeded = false;
  Matrix tau(n, k);
  for (int iter = 0;; ++iter) {
    std::vector<Matrix> chol;
    std::vector<double> log_norm;
    for (int c = 0; c < k; ++c) {
      chol.push_back(cholesky_lower(res.covs[static_cast<std::size_t>(c)]));
      log_norm.push_back(std::log(res.weights[static_cast<std::size_t>(c)]) - 0.5 * (static_cast<double>(dim) * kLog2Pi) -
                         0.5 * log_det_from_cholesky(chol.back()));
    }
    parallel_for(static_cast<std::size_t>(n), cfg.threads, [&](std::size_t i) {
      for (int c = 0; c < k; ++c) {
        const Vector r = chol[static_cast<std::size_t>(c)].triangularView<Eigen::Lower>().solve(
            Vector(points.col(static_cast<Eigen::Index>(i)) - res.means[static_cast<std::size_t>(c)]));
        tau(static_cast<Eigen::Index>(i), c) = log_norm[static_cast<std::size_t>(c)] - 0.5 * r.squaredNorm();
      }
    });
    res.loglik_trace.push_back(detail::normalize_rows(tau));
    res.n_iter = iter;
    if (cfg.on_iteration) cfg.on_iteration(iter, res.loglik_trace.back());
    if (detail::stop_now(res.loglik_trace, cfg.tol)) {
      res.converged = true;
      break;
    }
    if (iter >= cfg.max_iter) break;

    const Vector mass = tau.colwise().sum().transpose();
    std::vector<int> degenerate;
    for (int c = 0; c < k; ++c) {
      res.weights[static_cast<std::size_t>(c)] = mass[c] / static_cast<double>(n);
      if (!(mass[c] >= cfg.min_cluster_mass)) {
        degenerate.push_back(c);
        continue;
      }
      const Vector mu = points * tau.col(c) / mass[c];
      const Matrix centered = points.colwise() - mu;
      Matrix cov = Matrix::Zero(dim, dim);
      cov.selfadjointView<Eigen::Lower>().rankUpdate(centered * tau.col(c).cwiseSqrt().asDiagonal());
      cov = cov.selfadjointView<Eigen::Lower>();
      res.means[static_cast<std::size_t>(c)] = mu;
      res.covs[static_cast<std::size_t>(c)] = make_spd(symmetrized(cov / mass[c]));
    }
    if (!degenerate.empty()) {
      if (reseeded)
        throw NumericalError("gmm_fit: cluster " + std::to_string(degenerate.front() + 1) +
                             " collapsed again after reseeding (k=" + std::to_string(k) + ")");
      reseeded = true;
      Stream rs = make_stream(cfg.seed, StreamTag::kReseed, {0, static_cast<std::uint64_t>(iter)});
      for (int c : degenerate) {
        res.means[static_cast<std::size_t>(c)] = points.col(static_cast<Eigen::Index>(rs.below(static_cast<std::uint64_t>(n))));
        res.covs[static_cast<std::size_t>(c)] = Matrix::Identity(dim, dim);
        res.weights[static_cast<std::size_t>(c)] = 1.0 / k;
      }
      double s = 0.0;
      for (double w : res.weights) s += w;
      for (double& w : res.weights) w /= s;
    }
  }
  res.tau = std::move(tau);
  res.labels = classify(res.tau);
  res.bic = -2.0 * res.loglik_trace.back() + static_cast<double>(gmm_param_count(k, dim)) * std::log(static_cast<double>(n));
  return res;
}

inline GmmFitResult gmm_fit(const OrdinalDataset& ds, const FitConfig& cfg) {
  require_valid(ds);
  return gmm_fit(vectorized_data(ds), cfg);
}

}  // namespace ordmix
