#include "ordmix/simulate.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ordmix;

TEST(BenchmarkScenario, Settings) {
  const Scenario s = benchmark_scenario(300, 0.0, 1);
  EXPECT_EQ(s.k(), 3);
  EXPECT_EQ(s.levels, std::vector<int>(5, 5));
  EXPECT_EQ(s.weights, (std::vector<double>{0.3, 0.4, 0.3}));
  const double means[] = {1.75, 2.5, 3.25};
  for (int c = 0; c < 3; ++c) {
    const auto& p = s.components[static_cast<std::size_t>(c)];
    EXPECT_EQ(p.mean, Matrix::Constant(5, 5, means[c]));
    EXPECT_EQ(p.time_cov, Matrix::Identity(5, 5));
    EXPECT_EQ(p.var_cov, Matrix::Identity(5, 5));
  }
  EXPECT_EQ(scenario_noise(1), 0.0);
  EXPECT_EQ(scenario_noise(2), 0.1);
  EXPECT_EQ(scenario_noise(3), 0.2);
  EXPECT_THROW(scenario_noise(4), std::invalid_argument);
  EXPECT_THROW(benchmark_scenario(2, 0.0, 1), std::invalid_argument);
}

TEST(Generate, MarginalLevelFrequency) {
  Scenario s = benchmark_scenario(4000, 0.0, 2);
  s.weights = {0.0, 1.0, 0.0};
  const SimulatedDataset sd = generate(s);
  double hits = 0.0, total = 0.0;
  for (const auto& y : sd.dataset.units)
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      hits += y(i) == 2 ? 1.0 : 0.0;
      total += 1.0;
    }
  const double p = 0.5 * std::erfc(0.0) - 0.5 * std::erfc(1.0 / std::sqrt(2.0));
  EXPECT_NEAR(p, 0.34134, 1e-5);
  // Entries within a unit are independent under identity covariances.
  EXPECT_NEAR(hits / total, p, 3.0 * std::sqrt(p * (1 - p) / total));
}

TEST(Generate, NoiseCountAndMask) {
  const SimulatedDataset clean = generate(benchmark_scenario(300, 0.0, 3));
  for (char c : clean.noise_mask) EXPECT_EQ(c, 0);
  const SimulatedDataset noisy = generate(benchmark_scenario(300, 0.2, 3));
  int count = 0;
  for (char c : noisy.noise_mask) count += c;
  EXPECT_EQ(count, 60);
  EXPECT_THROW(generate(benchmark_scenario(300, 1.0, 3)), std::invalid_argument);
}

TEST(Generate, LevelsInRangeAndDeterministic) {
  const SimulatedDataset a = generate(benchmark_scenario(200, 0.1, 4));
  const SimulatedDataset b = generate(benchmark_scenario(200, 0.1, 4));
  EXPECT_TRUE(validate(a.dataset).empty());
  EXPECT_EQ(a.true_labels, b.true_labels);
  EXPECT_EQ(a.noise_mask, b.noise_mask);
  for (std::size_t i = 0; i < a.dataset.n_units(); ++i) EXPECT_EQ(a.dataset.units[i], b.dataset.units[i]);
  const SimulatedDataset c = generate(benchmark_scenario(200, 0.1, 5));
  EXPECT_NE(a.true_labels, c.true_labels);
}

TEST(Generate, ClusterFrequenciesFollowWeights) {
  const SimulatedDataset sd = generate(benchmark_scenario(6000, 0.0, 6));
  double counts[3] = {0, 0, 0};
  for (int l : sd.true_labels) counts[l - 1] += 1.0;
  const double expected[3] = {0.3 * 6000, 0.4 * 6000, 0.3 * 6000};
  double chi2 = 0.0;
  for (int c = 0; c < 3; ++c) chi2 += (counts[c] - expected[c]) * (counts[c] - expected[c]) / expected[c];
  EXPECT_LT(chi2, 13.82);  // chi-square(2) at 0.001
}

TEST(Generate, NoiseUnitsAreUniform) {
  const SimulatedDataset sd = generate(benchmark_scenario(2000, 0.5, 7));
  double counts[5] = {0, 0, 0, 0, 0}, total = 0.0;
  for (std::size_t i = 0; i < sd.dataset.n_units(); ++i) {
    if (!sd.noise_mask[i]) continue;
    for (Eigen::Index e = 0; e < sd.dataset.units[i].size(); ++e) {
      counts[sd.dataset.units[i](e) - 1] += 1.0;
      total += 1.0;
    }
  }
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - total / 5) * (c - total / 5) / (total / 5);
  EXPECT_LT(chi2, 18.47);  // chi-square(4) at 0.001
}

TEST(OracleAri, SeparatedMeansGiveOne) {
  Scenario s = benchmark_scenario(200, 0.0, 8);
  const double centers[] = {1.0, 3.0, 5.0};
  for (int c = 0; c < 3; ++c) {
    auto& p = s.components[static_cast<std::size_t>(c)];
    p.mean.setConstant(centers[c]);
    p.time_cov *= 0.1;
    p.var_cov *= 0.1;
  }
  const SimulatedDataset sd = generate(s);
  FitConfig cfg;
  cfg.seed = 1;
  // Entries sit 5 standard deviations from the nearest cut.
  EXPECT_DOUBLE_EQ(oracle_ari(sd, s, cfg), 1.0);
}

TEST(OracleAri, BenchmarkScenarioNearOptimum) {
  const Scenario s = benchmark_scenario(1500, 0.0, 9);
  const SimulatedDataset sd = generate(s);
  FitConfig cfg;
  cfg.seed = 2;
  EXPECT_NEAR(oracle_ari(sd, s, cfg), 0.85, 0.04);
}

TEST(OracleAri, SingleClusterConvention) {
  Scenario s = benchmark_scenario(50, 0.0, 10);
  s.weights = {1.0};
  s.components.resize(1);
  const SimulatedDataset sd = generate(s);
  EXPECT_EQ(oracle_ari(sd, s, FitConfig{}), 0.0);
}

TEST(NonNoisy, Filters) {
  EXPECT_EQ(non_noisy({1, 2, 3, 1}, {0, 1, 0, 1}), (std::vector<int>{1, 3}));
  EXPECT_THROW(non_noisy({1}, {0, 0}), std::invalid_argument);
}
