#pragma once

// Partition agreement (adjusted Rand index), cluster alignment by optimal
// assignment, and mean absolute percentage error of recovered parameters.

#include "ordmix/matvar.hpp"
#include "ordmix/mom.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

namespace ordmix {

/// Hubert-Arabie adjusted Rand index. Returns 1 when the adjustment is
/// undefined (both partitions trivial in the same way, or fewer than 2 units).
inline double ari(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("ari: partitions have different lengths");
  if (a.empty()) throw std::invalid_argument("ari: empty partitions");
  std::map<int, std::size_t> ia, ib;
  for (int v : a) ia.emplace(v, ia.size());
  for (int v : b) ib.emplace(v, ib.size());
  std::vector<double> table(ia.size() * ib.size(), 0.0), ra(ia.size(), 0.0), rb(ib.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t x = ia[a[i]], y = ib[b[i]];
    table[x * ib.size() + y] += 1.0;
    ra[x] += 1.0;
    rb[y] += 1.0;
  }
  auto pairs = [](double n) { return 0.5 * n * (n - 1.0); };
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (double v : table) index += pairs(v);
  for (double v : ra) sum_a += pairs(v);
  for (double v : rb) sum_b += pairs(v);
  const double total = pairs(static_cast<double>(a.size()));
  if (total == 0.0) return 1.0;
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

/// Maximum-weight assignment on a square weight matrix (Hungarian method on
/// the negated weights). Returns col[row].
inline std::vector<int> max_weight_assignment(const Matrix& weight) {
  const int n = static_cast<int>(weight.rows());
  if (weight.cols() != n) throw std::invalid_argument("max_weight_assignment: matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials formulation.
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = -weight(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) assignment[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return assignment;
}

/// perm[e] = 0-based true cluster matched to 0-based estimated cluster e,
/// maximizing the number of units on which the two labelings agree.
inline std::vector<int> align_clusters(const std::vector<int>& est_labels, const std::vector<int>& true_labels, int k) {
  if (est_labels.size() != true_labels.size()) throw std::invalid_argument("align_clusters: label vectors differ in length");
  Matrix agree = Matrix::Zero(k, k);
  for (std::size_t i = 0; i < est_labels.size(); ++i) {
    const int e = est_labels[i], t = true_labels[i];
    if (e < 1 || e > k || t < 1 || t > k) throw std::invalid_argument("align_clusters: label outside 1..k");
    agree(e - 1, t - 1) += 1.0;
  }
  return max_weight_assignment(agree);
}

struct MapeReport {
  double mape_mean = 0.0;
  double mape_phi_diag = 0.0;
  double mape_sigma_diag = 0.0;
  int n_zero_excluded = 0;  // true parameters equal to zero, left out
};

namespace detail {
struct MapeAccumulator {
  double sum = 0.0;
  int count = 0;
  int zeros = 0;
  void add(double truth, double est) {
    if (truth == 0.0) {
      ++zeros;
      return;
    }
    sum += std::abs((truth - est) / truth);
    ++count;
  }
  double value(const char* what) const {
    if (count == 0) throw std::invalid_argument(std::string("mape: every true ") + what + " parameter is zero");
    return sum / count;
  }
};
}  // namespace detail

/// MAPE of mean entries and of the Phi / Sigma diagonals after scale
/// normalization; estimated cluster e is compared with true cluster perm[e].
inline MapeReport mape(const MixtureModel& truth, const MixtureModel& est, const std::vector<int>& perm) {
  if (truth.k() != est.k() || static_cast<int>(perm.size()) != est.k()) throw std::invalid_argument("mape: cluster counts differ");
  detail::MapeAccumulator m, phi, sigma;
  for (int e = 0; e < est.k(); ++e) {
    const auto [tp, tc] = normalize_scale(truth.components[static_cast<std::size_t>(perm[static_cast<std::size_t>(e)])]);
    const auto [ep, ec] = normalize_scale(est.components[static_cast<std::size_t>(e)]);
    if (tp.mean.rows() != ep.mean.rows() || tp.mean.cols() != ep.mean.cols())
      throw std::invalid_argument("mape: dimension mismatch");
    for (Eigen::Index i = 0; i < tp.mean.size(); ++i) m.add(tp.mean(i), ep.mean(i));
    for (Eigen::Index i = 0; i < tp.time_cov.rows(); ++i) phi.add(tp.time_cov(i, i), ep.time_cov(i, i));
    for (Eigen::Index i = 0; i < tp.var_cov.rows(); ++i) sigma.add(tp.var_cov(i, i), ep.var_cov(i, i));
  }
  return {m.value("mean"), phi.value("time covariance"), sigma.value("variable covariance"), m.zeros + phi.zeros + sigma.zeros};
}

}  // namespace ordmix
