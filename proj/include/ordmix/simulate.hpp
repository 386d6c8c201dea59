#pragma once

// Synthetic longitudinal ordinal data: latent matrix-normal draws per cluster,
// discretized at the default thresholds, with an optional fraction of units
// replaced by uniform noise on the levels.

#include "ordmix/matvar.hpp"
#include "ordmix/metrics.hpp"
#include "ordmix/mom.hpp"
#include "ordmix/ordinal.hpp"
#include "ordmix/rng.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ordmix {

struct Scenario {
  int n = 0;
  std::vector<int> levels;
  std::vector<double> weights;
  std::vector<ClusterParams> components;
  double noise_fraction = 0.0;
  std::uint64_t seed = 0;

  int k() const { return static_cast<int>(components.size()); }

  MixtureModel true_model() const {
    MixtureModel m{weights, components, default_thresholds(levels)};
    m.validate();
    return m;
  }

  void validate() const {
    if (n < 1) throw std::invalid_argument("Scenario: n must be positive");
    if (!(noise_fraction >= 0.0 && noise_fraction < 1.0)) throw std::invalid_argument("Scenario: noise fraction must lie in [0, 1)");
    true_model();
    if (static_cast<Eigen::Index>(levels.size()) != components.front().n_vars())
      throw std::invalid_argument("Scenario: one level count per variable required");
  }
};

/// K = 3, J = T = 5, five levels, weights (0.3, 0.4, 0.3), identity
/// covariances and constant means 1.75 / 2.5 / 3.25.
inline Scenario benchmark_scenario(int n, double noise_fraction, std::uint64_t seed) {
  if (n < 3) throw std::invalid_argument("benchmark_scenario: n must be >= 3");
  Scenario s;
  s.n = n;
  s.levels.assign(5, 5);
  s.weights = {0.3, 0.4, 0.3};
  for (double mu : {1.75, 2.5, 3.25}) s.components.push_back({Matrix::Constant(5, 5, mu), Matrix::Identity(5, 5), Matrix::Identity(5, 5)});
  s.noise_fraction = noise_fraction;
  s.seed = seed;
  return s;
}

/// Scenario 1, 2, 3 = noise 0, 0.1, 0.2.
inline double scenario_noise(int scenario) {
  switch (scenario) {
    case 1: return 0.0;
    case 2: return 0.1;
    case 3: return 0.2;
    default: throw std::invalid_argument("scenario must be 1, 2 or 3");
  }
}

struct SimulatedDataset {
  OrdinalDataset dataset;
  std::vector<int> true_labels;  // 1-based
  std::vector<char> noise_mask;
  std::vector<Matrix> latent;    // latent draw per unit (unused for noisy units)
};

inline SimulatedDataset generate(const Scenario& s) {
  s.validate();
  const std::size_t n = static_cast<std::size_t>(s.n);
  const MixtureModel truth = s.true_model();
  Stream rng = make_stream(s.seed, StreamTag::kSimulate);

  SimulatedDataset out;
  out.true_labels.resize(n);
  std::vector<double> cum(s.weights.size());
  std::partial_sum(s.weights.begin(), s.weights.end(), cum.begin());
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * cum.back();
    int c = 0;
    while (c + 1 < s.k() && u > cum[static_cast<std::size_t>(c)]) ++c;
    out.true_labels[i] = c + 1;
  }

  // Noisy units are a uniform subset, so their inherited labels follow the weights.
  const std::size_t n_noise = static_cast<std::size_t>(std::llround(s.noise_fraction * static_cast<double>(n)));
  out.noise_mask.assign(n, 0);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t c = 0; c < n_noise; ++c) {
    std::swap(idx[c], idx[c + rng.below(n - c)]);
    out.noise_mask[idx[c]] = 1;
  }

  out.dataset.levels = s.levels;
  out.dataset.units.resize(n);
  out.dataset.unit_ids.resize(n);
  out.latent.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Stream ur = make_stream(s.seed, StreamTag::kSimulateUnit, {i});
    const ClusterParams& p = truth.components[static_cast<std::size_t>(out.true_labels[i] - 1)];
    out.latent[i] = sample(p, ur);
    if (out.noise_mask[i]) {
      LevelMatrix y(p.n_vars(), p.n_times());
      for (Eigen::Index t = 0; t < y.cols(); ++t)
        for (Eigen::Index j = 0; j < y.rows(); ++j)
          y(j, t) = 1 + static_cast<int>(ur.below(static_cast<std::uint64_t>(s.levels[static_cast<std::size_t>(j)])));
      out.dataset.units[i] = std::move(y);
    } else {
      out.dataset.units[i] = discretize(out.latent[i], truth.thresholds);
    }
    out.dataset.unit_ids[i] = std::to_string(i + 1);
  }
  return out;
}

/// ARI of the MAP classification under the true parameters against the true
/// labels. A single-cluster scenario has no partition to recover; returns 0.
inline double oracle_ari(const SimulatedDataset& sd, const Scenario& s, const FitConfig& cfg) {
  if (s.k() == 1) return 0.0;
  const Responsibilities r = responsibilities(sd.dataset, s.true_model(), cfg);
  return ari(classify(r.tau), sd.true_labels);
}

/// Restriction of a label vector to the units not flagged as noise.
inline std::vector<int> non_noisy(const std::vector<int>& labels, const std::vector<char>& noise_mask) {
  if (labels.size() != noise_mask.size()) throw std::invalid_argument("non_noisy: length mismatch");
  std::vector<int> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (!noise_mask[i]) out.push_back(labels[i]);
  return out;
}

}  // namespace ordmix
