#pragma once

// k-means++ seeding followed by a fixed number of Lloyd iterations. Used to
// initialize the mean matrices of every mixture in the library.

#include "ordmix/linalg.hpp"
#include "ordmix/rng.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace ordmix {

/// `points` holds one observation per column. Returns k centers as columns.
inline Matrix kmeanspp(const Matrix& points, int k, int lloyd_iters, Stream& rng) {
  const Eigen::Index n = points.cols(), dim = points.rows();
  if (k < 1 || k > n) throw std::invalid_argument("kmeanspp: need 1 <= k <= number of points");
  Matrix centers(dim, k);
  centers.col(0) = points.col(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = (points.col(i) - centers.col(c - 1)).squaredNorm();
      if (d < d2[static_cast<std::size_t>(i)]) d2[static_cast<std::size_t>(i)] = d;
      total += d2[static_cast<std::size_t>(i)];
    }
    Eigen::Index pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.col(c) = points.col(pick);
  }

  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  for (int it = 0; it < lloyd_iters; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (points.col(i) - centers.col(c)).squaredNorm();
        if (d < best) {
          best = d;
          assign[static_cast<std::size_t>(i)] = c;
        }
      }
    }
    Matrix sums = Matrix::Zero(dim, k);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.col(assign[static_cast<std::size_t>(i)]) += points.col(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0) centers.col(c) = sums.col(c) / counts[static_cast<std::size_t>(c)];
  }
  return centers;
}

}  // namespace ordmix
