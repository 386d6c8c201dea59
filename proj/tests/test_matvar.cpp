#include "ordmix/matvar.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ordmix;

namespace {

Matrix random_spd(Eigen::Index n, std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = nd(g);
  return a * a.transpose() + 0.5 * Matrix::Identity(n, n);
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  Matrix a(r, c);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = nd(g);
  return a;
}

// Dense MVN log-density via LU determinant and explicit inverse.
double dense_mvn(const Vector& x, const Vector& mu, const Matrix& cov) {
  const Eigen::FullPivLU<Matrix> lu(cov);
  const Vector r = x - mu;
  const double quad = r.dot(lu.inverse() * r);
  return -0.5 * (static_cast<double>(x.size()) * std::log(2.0 * M_PI) + std::log(lu.determinant()) + quad);
}

Matrix brute_kron(const Matrix& a, const Matrix& b) {
  Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index p = 0; p < b.rows(); ++p)
        for (Eigen::Index q = 0; q < b.cols(); ++q) k(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
  return k;
}

}  // namespace

TEST(LogDensity, AtMeanWithIdentityCovariances) {
  const ClusterParams p{Matrix::Zero(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  EXPECT_NEAR(log_density(Matrix::Zero(2, 2), p), -2.0 * std::log(2.0 * M_PI), 1e-12);
  EXPECT_NEAR(log_density(Matrix::Zero(2, 2), p), -3.6757541328186907, 1e-12);
}

TEST(LogDensity, ScalarStandardNormal) {
  const ClusterParams p{Matrix::Zero(1, 1), Matrix::Identity(1, 1), Matrix::Identity(1, 1)};
  EXPECT_NEAR(log_density(Matrix::Constant(1, 1, 1.0), p), -0.5 * std::log(2.0 * M_PI) - 0.5, 1e-12);
}

TEST(LogDensity, MatchesVectorizedDenseNormal) {
  std::mt19937_64 g(11);
  for (int rep = 0; rep < 50; ++rep) {
    const ClusterParams p{random_matrix(2, 3, g), random_spd(3, g), random_spd(2, g)};
    const Matrix z = random_matrix(2, 3, g);
    const double dense = dense_mvn(vec(z), vec(p.mean), brute_kron(p.time_cov, p.var_cov));
    EXPECT_NEAR(log_density(z, p), dense, 1e-10);
    EXPECT_NEAR(mvn_log_density(vec(z), vec(p.mean), kron_cov(p.time_cov, p.var_cov)), dense, 1e-10);
  }
}

TEST(LogDensity, RejectsBadInput) {
  const ClusterParams p{Matrix::Zero(2, 3), Matrix::Identity(3, 3), Matrix::Identity(2, 2)};
  EXPECT_THROW(log_density(Matrix::Zero(3, 2), p), std::invalid_argument);
  ClusterParams bad = p;
  bad.var_cov(0, 0) = -1.0;
  EXPECT_THROW(log_density(Matrix::Zero(2, 3), bad), std::exception);
}

TEST(Vec, ColumnStacking) {
  Matrix z(2, 2);
  z << 1, 3, 2, 4;
  const Vector v = vec(z);
  EXPECT_EQ(v, (Vector(4) << 1, 2, 3, 4).finished());
  EXPECT_EQ(unvec(v, 2, 2), z);
  EXPECT_EQ(vec_index(1, 2, 5), 11);  // (j=2, t=3) in 1-based terms is position 12
  EXPECT_THROW(unvec(v, 3, 2), std::invalid_argument);
}

TEST(KronCov, Cases) {
  EXPECT_EQ(kron_cov(Matrix::Identity(2, 2), Matrix::Identity(3, 3)), Matrix::Identity(6, 6));
  std::mt19937_64 g(3);
  const Matrix s = random_spd(3, g);
  EXPECT_TRUE(kron_cov(Matrix::Constant(1, 1, 2.0), s).isApprox(2.0 * s, 1e-15));
  const Matrix phi = random_spd(2, g), sig = random_spd(2, g);
  EXPECT_TRUE(kron_cov(phi, sig).isApprox(brute_kron(phi, sig), 1e-15));
}

TEST(Sample, MomentsMatchVectorizedNormal) {
  std::mt19937_64 g(5);
  Matrix phi(3, 3);
  phi << 1.0, 0.4, 0.1, 0.4, 1.5, 0.3, 0.1, 0.3, 0.8;
  Matrix sig(2, 2);
  sig << 2.0, -0.6, -0.6, 1.0;
  const ClusterParams p{random_matrix(2, 3, g), phi, sig};
  Stream rng(77);
  const int n = 100000;
  Vector sum = Vector::Zero(6);
  Matrix sq = Matrix::Zero(6, 6);
  for (int i = 0; i < n; ++i) {
    const Vector v = vec(sample(p, rng));
    sum += v;
    sq.selfadjointView<Eigen::Lower>().rankUpdate(v);
  }
  const Vector mean = sum / n;
  Matrix cov = Matrix(sq.selfadjointView<Eigen::Lower>()) / n - mean * mean.transpose();
  const Matrix truth = brute_kron(phi, sig);
  for (Eigen::Index d = 0; d < 6; ++d) EXPECT_NEAR(mean[d], vec(p.mean)[d], 3.0 * std::sqrt(truth(d, d) / n));
  EXPECT_LT((cov - truth).norm() / truth.norm(), 0.05);
}

TEST(Sample, IdentityMeanWithinThreeStandardErrors) {
  const ClusterParams p{Matrix::Constant(2, 2, 1.5), Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  Stream rng(1);
  const int n = 100000;
  Matrix acc = Matrix::Zero(2, 2);
  for (int i = 0; i < n; ++i) acc += sample(p, rng);
  acc /= n;
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(acc(i), 1.5, 3.0 / std::sqrt(n));
}

TEST(Sample, DeterministicForFixedSeed) {
  const ClusterParams p{Matrix::Zero(3, 2), Matrix::Identity(2, 2), Matrix::Identity(3, 3)};
  Stream a(99), b(99);
  EXPECT_EQ(sample(p, a), sample(p, b));
}

TEST(NormalizeScale, Examples) {
  const ClusterParams id{Matrix::Zero(5, 5), Matrix::Identity(5, 5), Matrix::Identity(5, 5)};
  const auto [same, c1] = normalize_scale(id);
  EXPECT_EQ(same.time_cov, id.time_cov);
  EXPECT_EQ(c1, 1.0);
  const ClusterParams doubled{Matrix::Zero(5, 5), 2.0 * Matrix::Identity(5, 5), Matrix::Identity(5, 5)};
  const auto [n2, c2] = normalize_scale(doubled);
  EXPECT_TRUE(n2.time_cov.isApprox(Matrix::Identity(5, 5)));
  EXPECT_TRUE(n2.var_cov.isApprox(2.0 * Matrix::Identity(5, 5)));
  EXPECT_DOUBLE_EQ(c2, 2.0);
}

TEST(NormalizeScale, LogDensityInvariant) {
  std::mt19937_64 g(8);
  for (int rep = 0; rep < 20; ++rep) {
    const ClusterParams p{random_matrix(3, 4, g), random_spd(4, g), random_spd(3, g)};
    const auto [q, c] = normalize_scale(p);
    EXPECT_NEAR(q.time_cov.trace(), 4.0, 1e-12);
    const Matrix z = random_matrix(3, 4, g);
    EXPECT_NEAR(log_density(z, p), log_density(z, q), 1e-10);
  }
}

TEST(ParamCount, Formula) {
  EXPECT_EQ(param_count(3, 5, 5), 167);
  EXPECT_EQ(param_count(1, 1, 1), 3);
  // Separable covariance: 15 + 15 elements against 25 * 26 / 2 unrestricted.
  EXPECT_EQ(25 * 26 / 2, 325);
  EXPECT_EQ(5 * 6 / 2 + 5 * 6 / 2, 30);
  for (int k = 1; k < 5; ++k)
    for (int j = 1; j < 5; ++j)
      for (int t = 1; t < 5; ++t) {
        EXPECT_LT(param_count(k, j, t), param_count(k + 1, j, t));
        EXPECT_LT(param_count(k, j, t), param_count(k, j + 1, t));
        EXPECT_LT(param_count(k, j, t), param_count(k, j, t + 1));
      }
}

TEST(ClusterParams, Validate) {
  ClusterParams p{Matrix::Zero(2, 3), Matrix::Identity(3, 3), Matrix::Identity(2, 2)};
  EXPECT_NO_THROW(p.validate());
  p.time_cov(0, 1) = 0.5;  // asymmetric
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.time_cov = Matrix::Identity(2, 2);
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(MakeSpd, JitterLadder) {
  Matrix singular = Matrix::Ones(3, 3);
  const Matrix fixed = make_spd(singular);
  EXPECT_NO_THROW(cholesky_lower(fixed));
  EXPECT_LT((fixed - singular).norm(), 1e-5);
  Matrix negative = -Matrix::Identity(2, 2);
  EXPECT_THROW(make_spd(negative), NumericalError);
}
