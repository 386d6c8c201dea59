#pragma once

// Monte-Carlo EM for finite mixtures of matrix-variate normals observed only
// through ordinal discretization. Each unit contributes the box of latent
// matrices compatible with its responses; the E-step estimates the box
// probability under every component (responsibilities, observed likelihood)
// and the truncated first and second moments by Gibbs sampling; the M-step
// updates weights, means and the two separable covariances in the order
// Sigma (given the previous Phi) then Phi (given the new Sigma).

#include "ordmix/kmeans.hpp"
#include "ordmix/linalg.hpp"
#include "ordmix/matvar.hpp"
#include "ordmix/ordinal.hpp"
#include "ordmix/parallel.hpp"
#include "ordmix/rng.hpp"
#include "ordmix/trunc.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ordmix {

struct MixtureModel {
  std::vector<double> weights;
  std::vector<ClusterParams> components;
  Thresholds thresholds;

  int k() const { return static_cast<int>(components.size()); }
  Eigen::Index n_vars() const { return components.empty() ? 0 : components.front().n_vars(); }
  Eigen::Index n_times() const { return components.empty() ? 0 : components.front().n_times(); }

  void validate() const {
    if (components.empty()) throw std::invalid_argument("MixtureModel: K must be at least 1");
    if (weights.size() != components.size()) throw std::invalid_argument("MixtureModel: one weight per component required");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("MixtureModel: negative weight");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("MixtureModel: weights do not sum to 1");
    for (const auto& c : components) {
      c.validate();
      if (c.n_vars() != n_vars() || c.n_times() != n_times())
        throw std::invalid_argument("MixtureModel: components disagree on (J, T)");
    }
    if (!thresholds.cuts.empty() && thresholds.n_vars() != n_vars())
      throw std::invalid_argument("MixtureModel: threshold count differs from J");
  }
};

enum class InitMethod { kKmeansPlusPlus, kRandom };

struct FitConfig {
  int k = 1;
  double tol = 1e-3;        // stop when |L(s+1) - L(s)| < tol
  int max_iter = 200;       // M-steps
  InitMethod init = InitMethod::kKmeansPlusPlus;
  int restarts = 5;         // full fits for InitMethod::kRandom; best loglik kept
  GibbsConfig gibbs;
  int prob_points = 256;    // randomized-lattice points per box probability
  std::uint64_t seed = 0;
  double min_cluster_mass = 2.0;
  double tau_skip = 1e-6;   // no Gibbs moments for responsibilities below this
  int kmeans_iters = 10;
  int threads = 1;
  std::function<void(int iteration, double loglik)> on_iteration;  // optional progress hook

  void validate() const {
    if (k < 1) throw std::invalid_argument("FitConfig: k must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("FitConfig: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("FitConfig: max_iter must be positive");
    if (restarts < 1) throw std::invalid_argument("FitConfig: restarts must be positive");
    if (prob_points < 1) throw std::invalid_argument("FitConfig: prob_points must be positive");
    if (!(min_cluster_mass > 0.0)) throw std::invalid_argument("FitConfig: min_cluster_mass must be positive");
    if (kmeans_iters < 0) throw std::invalid_argument("FitConfig: kmeans_iters must be nonnegative");
    gibbs.validate();
  }
};

/// Identifies the Gibbs substreams of one E-step.
struct StreamKey {
  std::uint64_t restart = 0;
  std::uint64_t iteration = 0;
};

struct Responsibilities {
  Matrix tau;       // N x K
  Matrix log_prob;  // N x K, log P(box_i | component k)
  double loglik = 0.0;
};

struct EStepQuantities {
  Matrix tau;       // N x K
  Matrix log_prob;  // N x K
  double loglik = 0.0;
  int k = 0;
  std::vector<Vector> m;  // [i * K + k], empty when the pair was skipped
  std::vector<Matrix> s;

  bool active(std::size_t i, int c) const { return m[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)].size() > 0; }
};

struct FitResult {
  MixtureModel model;
  Matrix tau;
  std::vector<int> labels;  // 1-based cluster indices
  std::vector<double> loglik_trace;
  double bic = 0.0;
  int n_iter = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  int restart = 0;
};

struct SelectionRow {
  int k = 0;
  double bic = 0.0;
  double loglik = 0.0;
  std::int64_t n_params = 0;
  bool converged = false;
  bool failed = false;
  std::string error;
};

struct SelectionTable {
  std::vector<SelectionRow> rows;
  int best_k = 0;
};

// ---------------------------------------------------------------------------
// Small pieces

inline double bic(double loglik, int k, Eigen::Index n_vars, Eigen::Index n_times, std::size_t n_units) {
  if (n_units < 1) throw std::invalid_argument("bic: N must be >= 1");
  return -2.0 * loglik + static_cast<double>(param_count(k, n_vars, n_times)) * std::log(static_cast<double>(n_units));
}

/// Row-wise argmax, 1-based; ties resolve to the lowest index.
inline std::vector<int> classify(const Matrix& tau) {
  std::vector<int> labels(static_cast<std::size_t>(tau.rows()));
  for (Eigen::Index i = 0; i < tau.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < tau.cols(); ++c)
      if (tau(i, c) > tau(i, best)) best = c;
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best) + 1;
  }
  return labels;
}

/// E[Z Phi^-1 Z'] from S = E[vec(Z) vec(Z)']: D(h,t) = sum_{g,d} S(gJ+h, dJ+t) phiinv(g,d).
inline Matrix compute_D(const Matrix& s, const Matrix& phi_inv, Eigen::Index n_vars, Eigen::Index n_times) {
  const Eigen::Index jt = n_vars * n_times;
  if (s.rows() != jt || s.cols() != jt || phi_inv.rows() != n_times || phi_inv.cols() != n_times)
    throw std::invalid_argument("compute_D: dimension mismatch");
  Matrix d = Matrix::Zero(n_vars, n_vars);
  for (Eigen::Index t = 0; t < n_vars; ++t)
    for (Eigen::Index h = 0; h < n_vars; ++h) {
      double acc = 0.0;
      for (Eigen::Index dd = 0; dd < n_times; ++dd)
        for (Eigen::Index g = 0; g < n_times; ++g) acc += s(g * n_vars + h, dd * n_vars + t) * phi_inv(g, dd);
      d(h, t) = acc;
    }
  return d;
}

/// E[Z' Sigma^-1 Z] from S: C(h,t) = sum_{g,d} S(hJ+g, tJ+d) sigmainv(g,d).
inline Matrix compute_C(const Matrix& s, const Matrix& sigma_inv, Eigen::Index n_vars, Eigen::Index n_times) {
  const Eigen::Index jt = n_vars * n_times;
  if (s.rows() != jt || s.cols() != jt || sigma_inv.rows() != n_vars || sigma_inv.cols() != n_vars)
    throw std::invalid_argument("compute_C: dimension mismatch");
  Matrix c = Matrix::Zero(n_times, n_times);
  for (Eigen::Index t = 0; t < n_times; ++t)
    for (Eigen::Index h = 0; h < n_times; ++h) {
      double acc = 0.0;
      for (Eigen::Index dd = 0; dd < n_vars; ++dd)
        for (Eigen::Index g = 0; g < n_vars; ++g) acc += s(h * n_vars + g, t * n_vars + dd) * sigma_inv(g, dd);
      c(h, t) = acc;
    }
  return c;
}

inline std::vector<Box> unit_boxes(const OrdinalDataset& ds, const Thresholds& g) {
  std::vector<Box> out;
  out.reserve(ds.n_units());
  for (const auto& y : ds.units) out.push_back(pattern_box(y, g));
  return out;
}

inline void require_valid(const OrdinalDataset& ds) {
  const auto v = validate(ds);
  if (!v.empty()) {
    std::string msg = "invalid dataset: " + v.front().message;
    if (v.size() > 1) msg += " (and " + std::to_string(v.size() - 1) + " more)";
    throw std::invalid_argument(msg);
  }
}

/// Observed data as one vec(Y_i) column per unit.
inline Matrix vectorized_data(const OrdinalDataset& ds) {
  const Eigen::Index jt = ds.n_vars() * ds.n_times();
  Matrix x(jt, static_cast<Eigen::Index>(ds.n_units()));
  for (std::size_t i = 0; i < ds.n_units(); ++i) x.col(static_cast<Eigen::Index>(i)) = vec(as_real(ds.units[i]));
  return x;
}

// ---------------------------------------------------------------------------
// Initialization

/// Identity covariances, equal weights, and mean matrices from k-means++ on
/// the columns of `x` (vec of each unit) or from k distinct columns drawn
/// uniformly. Thresholds are left empty.
inline MixtureModel init_from_points(const Matrix& x, Eigen::Index j, Eigen::Index t, int k, InitMethod method, Stream& rng,
                                     int kmeans_iters = 10) {
  if (k < 1) throw std::invalid_argument("init_params: k must be >= 1");
  if (k > x.cols()) throw std::invalid_argument("init_params: k exceeds the number of units");
  if (x.rows() != j * t) throw std::invalid_argument("init_params: data rows differ from J*T");
  MixtureModel model;
  model.weights.assign(static_cast<std::size_t>(k), 1.0 / k);
  Matrix centers(j * t, k);
  if (method == InitMethod::kKmeansPlusPlus) {
    centers = kmeanspp(x, k, std::max(kmeans_iters, k == 1 ? 1 : 0), rng);
  } else {
    // k distinct units by partial Fisher-Yates.
    std::vector<std::size_t> idx(static_cast<std::size_t>(x.cols()));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (int c = 0; c < k; ++c) {
      const std::size_t pick = static_cast<std::size_t>(c) + rng.below(idx.size() - static_cast<std::size_t>(c));
      std::swap(idx[static_cast<std::size_t>(c)], idx[pick]);
      centers.col(c) = x.col(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)]));
    }
  }
  for (int c = 0; c < k; ++c)
    model.components.push_back({unvec(centers.col(c), j, t), Matrix::Identity(t, t), Matrix::Identity(j, j)});
  return model;
}

inline MixtureModel init_params(const OrdinalDataset& ds, int k, InitMethod method, Stream& rng, int kmeans_iters = 10) {
  MixtureModel model = init_from_points(vectorized_data(ds), ds.n_vars(), ds.n_times(), k, method, rng, kmeans_iters);
  model.thresholds = default_thresholds(ds.levels);
  return model;
}

// ---------------------------------------------------------------------------
// E-step

namespace detail {

struct ComponentCache {
  std::optional<BoxProbabilityEstimator> prob;
  std::optional<TruncatedMvnSampler> gibbs;
};

inline std::vector<ComponentCache> build_caches(const MixtureModel& model, bool with_sampler) {
  std::vector<ComponentCache> out(static_cast<std::size_t>(model.k()));
  for (int c = 0; c < model.k(); ++c) {
    const ClusterParams& p = model.components[static_cast<std::size_t>(c)];
    const Vector mu = vec(p.mean);
    out[static_cast<std::size_t>(c)].prob.emplace(mu, kron_cov(p.time_cov, p.var_cov));
    if (with_sampler)
      out[static_cast<std::size_t>(c)].gibbs.emplace(TruncatedMvnSampler::FromPrecision{}, mu,
                                                     kron_cov(spd_inverse(p.time_cov), spd_inverse(p.var_cov)));
  }
  return out;
}

inline void fill_responsibilities(const OrdinalDataset& ds, const MixtureModel& model, const FitConfig& cfg,
                                  const std::vector<Box>& boxes, const std::vector<ComponentCache>& caches,
                                  Matrix& tau, Matrix& log_prob, double& loglik) {
  const std::size_t n = ds.n_units();
  const int k = model.k();
  tau.resize(static_cast<Eigen::Index>(n), k);
  log_prob.resize(static_cast<Eigen::Index>(n), k);
  std::vector<double> unit_ll(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    std::vector<double> lp(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
      // Same points for every component and every iteration.
      Stream rs = make_stream(cfg.seed, StreamTag::kBoxProbability, {i});
      const ProbEstimate e = caches[static_cast<std::size_t>(c)].prob->estimate(boxes[i], cfg.prob_points, rs);
      log_prob(static_cast<Eigen::Index>(i), c) = e.log_prob;
      lp[static_cast<std::size_t>(c)] = std::log(model.weights[static_cast<std::size_t>(c)]) + e.log_prob;
    }
    const double lse = log_sum_exp(lp);
    if (!std::isfinite(lse)) throw NumericalError("e_step: every component underflows for unit " + std::to_string(i + 1));
    unit_ll[i] = lse;
    double total = 0.0;
    for (int c = 0; c < k; ++c) total += (tau(static_cast<Eigen::Index>(i), c) = std::exp(lp[static_cast<std::size_t>(c)] - lse));
    for (int c = 0; c < k; ++c) tau(static_cast<Eigen::Index>(i), c) /= total;
  });
  loglik = 0.0;
  for (double v : unit_ll) loglik += v;
}

}  // namespace detail

/// Responsibilities and observed log-likelihood only (no Gibbs moments).
inline Responsibilities responsibilities(const OrdinalDataset& ds, const MixtureModel& model, const FitConfig& cfg) {
  model.validate();
  const auto boxes = unit_boxes(ds, model.thresholds);
  const auto caches = detail::build_caches(model, false);
  Responsibilities r;
  detail::fill_responsibilities(ds, model, cfg, boxes, caches, r.tau, r.log_prob, r.loglik);
  return r;
}

inline double observed_loglik(const OrdinalDataset& ds, const MixtureModel& model, const FitConfig& cfg) {
  return responsibilities(ds, model, cfg).loglik;
}

inline EStepQuantities e_step(const OrdinalDataset& ds, const MixtureModel& model, const FitConfig& cfg, StreamKey key = {}) {
  model.validate();
  const auto boxes = unit_boxes(ds, model.thresholds);
  const auto caches = detail::build_caches(model, true);
  EStepQuantities q;
  q.k = model.k();
  detail::fill_responsibilities(ds, model, cfg, boxes, caches, q.tau, q.log_prob, q.loglik);
  const std::size_t n = ds.n_units();
  q.m.assign(n * static_cast<std::size_t>(q.k), Vector());
  q.s.assign(n * static_cast<std::size_t>(q.k), Matrix());
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    for (int c = 0; c < q.k; ++c) {
      if (q.tau(static_cast<Eigen::Index>(i), c) < cfg.tau_skip) continue;
      Stream rs = make_stream(cfg.seed, StreamTag::kGibbs, {key.restart, key.iteration, i, static_cast<std::uint64_t>(c)});
      MomentEstimates me = caches[static_cast<std::size_t>(c)].gibbs->moments(boxes[i], cfg.gibbs, rs);
      const std::size_t slot = i * static_cast<std::size_t>(q.k) + static_cast<std::size_t>(c);
      q.m[slot] = std::move(me.m);
      q.s[slot] = std::move(me.s);
    }
  });
  return q;
}

// ---------------------------------------------------------------------------
// M-step

struct MStepOutcome {
  MixtureModel model;
  std::vector<int> degenerate;  // 0-based clusters whose mass fell below the floor
};

/// Shared M-step. `active(i, c)`, `first(i, c)` (E[vec Z]) and `second(i, c)`
/// (E[vec Z vec Z']) supply the per-pair moments; pairs that are not active
/// are left out of the mean and covariance sums.
template <typename Active, typename First, typename Second>
MStepOutcome m_step_from_moments(const Matrix& tau, const MixtureModel& prev, double min_cluster_mass, Active&& active,
                                 First&& first, Second&& second) {
  const Eigen::Index n = tau.rows();
  const int k = prev.k();
  const Eigen::Index j = prev.n_vars(), t = prev.n_times(), jt = j * t;
  MStepOutcome out;
  out.model = prev;
  const Vector colsum = tau.colwise().sum().transpose();
  const double total = colsum.sum();
  for (int c = 0; c < k; ++c) out.model.weights[static_cast<std::size_t>(c)] = colsum[c] / total;

  for (int c = 0; c < k; ++c) {
    double w = 0.0;
    Vector mbar = Vector::Zero(jt);
    Matrix sbar = Matrix::Zero(jt, jt);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!active(static_cast<std::size_t>(i), c)) continue;
      const double ti = tau(i, c);
      w += ti;
      mbar.noalias() += ti * first(static_cast<std::size_t>(i), c);
      sbar.noalias() += ti * second(static_cast<std::size_t>(i), c);
    }
    if (!(w >= min_cluster_mass)) {
      out.degenerate.push_back(c);
      continue;
    }
    const ClusterParams& old = prev.components[static_cast<std::size_t>(c)];
    const Matrix msum = unvec(mbar, j, t);  // sum_i tau_ik M_ik
    const Matrix mean = msum / w;

    const Matrix phi_inv = spd_inverse(old.time_cov);
    const Matrix d = compute_D(sbar, phi_inv, j, t);
    const Matrix mp = mean * phi_inv;
    Matrix sigma = (d - mp * msum.transpose() - msum * mp.transpose() + w * mp * mean.transpose()) / (static_cast<double>(t) * w);
    sigma = make_spd(sigma);

    const Matrix sigma_inv = spd_inverse(sigma);
    const Matrix cm = compute_C(sbar, sigma_inv, j, t);
    const Matrix ms = mean.transpose() * sigma_inv;
    Matrix phi = (cm - ms * msum - msum.transpose() * ms.transpose() + w * ms * mean) / (static_cast<double>(j) * w);
    phi = make_spd(phi);

    out.model.components[static_cast<std::size_t>(c)] = {mean, std::move(phi), std::move(sigma)};
  }
  return out;
}

inline MStepOutcome m_step_outcome(const EStepQuantities& q, const MixtureModel& prev, double min_cluster_mass) {
  const std::size_t kk = static_cast<std::size_t>(q.k);
  return m_step_from_moments(
      q.tau, prev, min_cluster_mass, [&](std::size_t i, int c) { return q.active(i, c); },
      [&](std::size_t i, int c) -> const Vector& { return q.m[i * kk + static_cast<std::size_t>(c)]; },
      [&](std::size_t i, int c) -> const Matrix& { return q.s[i * kk + static_cast<std::size_t>(c)]; });
}

/// Throws NumericalError naming the first collapsed cluster.
inline MixtureModel m_step(const EStepQuantities& q, const MixtureModel& prev, double min_cluster_mass = 2.0) {
  MStepOutcome o = m_step_outcome(q, prev, min_cluster_mass);
  if (!o.degenerate.empty())
    throw NumericalError("m_step: cluster " + std::to_string(o.degenerate.front() + 1) + " has mass below " +
                         std::to_string(min_cluster_mass));
  return std::move(o.model);
}

/// Restarts collapsed clusters at uniformly drawn observed matrices with
/// identity covariances and weight 1/K, then renormalizes the weights.
/// `unit(u)` returns observed matrix u of n_units.
template <typename Unit>
void reseed_clusters(MixtureModel& model, const std::vector<int>& clusters, std::size_t n_units, Unit&& unit, Stream& rng) {
  const Eigen::Index j = model.n_vars(), t = model.n_times();
  for (int c : clusters) {
    const std::size_t u = rng.below(n_units);
    model.components[static_cast<std::size_t>(c)] = {unit(u), Matrix::Identity(t, t), Matrix::Identity(j, j)};
    model.weights[static_cast<std::size_t>(c)] = 1.0 / model.k();
  }
  const double s = std::accumulate(model.weights.begin(), model.weights.end(), 0.0);
  for (double& w : model.weights) w /= s;
}

inline void reseed_clusters(MixtureModel& model, const std::vector<int>& clusters, const OrdinalDataset& ds, Stream& rng) {
  reseed_clusters(model, clusters, ds.n_units(), [&](std::size_t u) { return as_real(ds.units[u]); }, rng);
}

// ---------------------------------------------------------------------------
// Fitting

/// EM from a given starting model; `restart` selects the Gibbs substreams.
inline FitResult fit_from(const OrdinalDataset& ds, MixtureModel model, const FitConfig& cfg, int restart = 0) {
  cfg.validate();
  bool reseeded = false;
  FitResult res;
  res.seed = cfg.seed;
  res.restart = restart;
  EStepQuantities q;
  for (int iter = 0;; ++iter) {
    q = e_step(ds, model, cfg, {static_cast<std::uint64_t>(restart), static_cast<std::uint64_t>(iter)});
    res.loglik_trace.push_back(q.loglik);
    res.n_iter = iter;
    if (cfg.on_iteration) cfg.on_iteration(iter, q.loglik);
    const std::size_t s = res.loglik_trace.size();
    if (s > 1 && std::abs(res.loglik_trace[s - 1] - res.loglik_trace[s - 2]) < cfg.tol) {
      res.converged = true;
      break;
    }
    if (iter >= cfg.max_iter) break;
    MStepOutcome o = m_step_outcome(q, model, cfg.min_cluster_mass);
    if (!o.degenerate.empty()) {
      if (reseeded)
        throw NumericalError("fit: cluster " + std::to_string(o.degenerate.front() + 1) +
                             " collapsed again after reseeding (k=" + std::to_string(cfg.k) + ")");
      reseeded = true;
      Stream rs = make_stream(cfg.seed, StreamTag::kReseed, {static_cast<std::uint64_t>(restart), static_cast<std::uint64_t>(iter)});
      reseed_clusters(o.model, o.degenerate, ds, rs);
    }
    model = std::move(o.model);
  }
  res.model = std::move(model);
  res.tau = std::move(q.tau);
  res.labels = classify(res.tau);
  res.bic = bic(res.loglik_trace.back(), res.model.k(), ds.n_vars(), ds.n_times(), ds.n_units());
  return res;
}

inline FitResult fit(const OrdinalDataset& ds, const FitConfig& cfg) {
  cfg.validate();
  require_valid(ds);
  if (static_cast<std::size_t>(cfg.k) > ds.n_units()) throw std::invalid_argument("fit: k exceeds the number of units");
  if (cfg.init == InitMethod::kKmeansPlusPlus) {
    Stream rs = make_stream(cfg.seed, StreamTag::kInit, {0});
    return fit_from(ds, init_params(ds, cfg.k, cfg.init, rs, cfg.kmeans_iters), cfg, 0);
  }
  std::optional<FitResult> best;
  std::string last_error;
  for (int r = 0; r < cfg.restarts; ++r) {
    Stream rs = make_stream(cfg.seed, StreamTag::kInit, {static_cast<std::uint64_t>(r)});
    try {
      FitResult f = fit_from(ds, init_params(ds, cfg.k, cfg.init, rs, cfg.kmeans_iters), cfg, r);
      if (!best || f.loglik_trace.back() > best->loglik_trace.back()) best = std::move(f);
    } catch (const NumericalError& e) {
      last_error = e.what();
    }
  }
  if (!best) throw NumericalError("fit: every random restart failed: " + last_error);
  return std::move(*best);
}

/// Fits k = k_min..k_max with the same base seed and marks the lowest BIC.
/// A k whose fit fails numerically is reported as a failed row.
inline SelectionTable select_k(const OrdinalDataset& ds, int k_min, int k_max, const FitConfig& base) {
  if (k_min < 1 || k_min > k_max || static_cast<std::size_t>(k_max) > ds.n_units())
    throw std::invalid_argument("select_k: need 1 <= k_min <= k_max <= N");
  SelectionTable table;
  double best_bic = std::numeric_limits<double>::infinity();
  for (int k = k_min; k <= k_max; ++k) {
    FitConfig cfg = base;
    cfg.k = k;
    SelectionRow row;
    row.k = k;
    row.n_params = param_count(k, ds.n_vars(), ds.n_times());
    try {
      const FitResult f = fit(ds, cfg);
      row.loglik = f.loglik_trace.back();
      row.bic = f.bic;
      row.converged = f.converged;
    } catch (const NumericalError& e) {
      row.failed = true;
      row.error = e.what();
      row.loglik = -std::numeric_limits<double>::infinity();
      row.bic = std::numeric_limits<double>::infinity();
    }
    if (!row.failed && row.bic < best_bic) {
      best_bic = row.bic;
      table.best_k = k;
    }
    table.rows.push_back(row);
  }
  if (table.best_k == 0) throw NumericalError("select_k: every candidate k failed");
  return table;
}

}  // namespace ordmix
