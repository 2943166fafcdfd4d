#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "test_util.hpp"
#include "transduct/zero_shot.hpp"

using namespace transduct;

TEST(SoftLabels, SinglePrototypeGivesOne) {
  std::mt19937_64 rng(1);
  const auto f = EmbeddingMatrix::from_rows(testutil::random_unit_rows(rng, 5, 4));
  const auto t = EmbeddingMatrix::from_rows(testutil::random_unit_rows(rng, 1, 4));
  const auto y = compute_soft_labels(f, t, 50.0);
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_EQ(y.z(i, 0), 1.0);
}

TEST(SoftLabels, ZeroTemperatureIsUniform) {
  std::mt19937_64 rng(2);
  const auto f = EmbeddingMatrix::from_rows(testutil::random_unit_rows(rng, 5, 4));
  const auto t = EmbeddingMatrix::from_rows(testutil::random_unit_rows(rng, 3, 4));
  const auto y = compute_soft_labels(f, t, 0.0);
  for (Eigen::Index i = 0; i < 5; ++i) {
    for (Eigen::Index k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(y.z(i, k), 1.0 / 3.0);
  }
  for (std::size_t p : hard_predict(y)) EXPECT_EQ(p, 0u);
}

TEST(SoftLabels, TwoDimensionalExample) {
  Matrix f(1, 2), t(2, 2);
  f << 1, 0;
  t << 1, 0, 0, 1;
  const auto y = compute_soft_labels(EmbeddingMatrix::from_rows(f), EmbeddingMatrix::from_rows(t), 1.0);
  // exp(1) / (exp(1) + 1), 50-digit reference.
  EXPECT_NEAR(y.z(0, 0), 0.7310585786300048792, 1e-15);
  EXPECT_NEAR(y.z(0, 1), 0.2689414213699951207, 1e-15);
}

TEST(SoftLabels, MatchesHighPrecisionSoftmax) {
  std::mt19937_64 rng(3);
  const auto f = EmbeddingMatrix::from_rows(testutil::random_unit_rows(rng, 20, 16));
  const auto t = EmbeddingMatrix::from_rows(testutil::random_unit_rows(rng, 7, 16));
  const auto y = compute_soft_labels(f, t, 100.0);
  for (Eigen::Index i = 0; i < 20; ++i) {
    oracles::Vec logits(7);
    for (Eigen::Index k = 0; k < 7; ++k) logits[k] = 100.0 * f.data().row(i).dot(t.data().row(k));
    const oracles::Vec ref = oracles::softmax_hp(logits);
    for (Eigen::Index k = 0; k < 7; ++k) EXPECT_NEAR(y.z(i, k), ref[k], 1e-12);
  }
  EXPECT_TRUE(is_simplex(y.z));
}

TEST(SoftLabels, DimensionMismatchThrows) {
  std::mt19937_64 rng(4);
  const auto f = EmbeddingMatrix::from_rows(testutil::random_unit_rows(rng, 3, 4));
  const auto t = EmbeddingMatrix::from_rows(testutil::random_unit_rows(rng, 2, 5));
  EXPECT_THROW(compute_soft_labels(f, t, 1.0), Error);
}

TEST(SoftLabels, ArgmaxIndependentOfPositiveTemperature) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> tau(0.01, 200.0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto f = EmbeddingMatrix::from_rows(testutil::random_unit_rows(rng, 40, 8));
    const auto t = EmbeddingMatrix::from_rows(testutil::random_unit_rows(rng, 6, 8));
    EXPECT_EQ(hard_predict(compute_soft_labels(f, t, tau(rng))), hard_predict(compute_soft_labels(f, t, tau(rng))));
  }
}

TEST(HardPredict, UniqueArgmaxAndTies) {
  Matrix y(3, 3);
  y << 0.2, 0.5, 0.3, 0.5, 0.5, 0.0, 0.3, 0.3, 0.4;
  EXPECT_EQ(hard_predict(y), (std::vector<std::size_t>{1, 0, 2}));
}

TEST(InitTopK, TopOneIsColumnArgmax) {
  std::mt19937_64 rng(6);
  const auto f = EmbeddingMatrix::from_rows(testutil::random_unit_rows(rng, 10, 5));
  const SimplexAssignments y{testutil::random_simplex_rows(rng, 10, 3)};
  const Matrix mu = init_prototypes_topk(f, y, 1);
  for (Eigen::Index k = 0; k < 3; ++k) {
    Eigen::Index best = 0;
    y.z.col(k).maxCoeff(&best);
    EXPECT_EQ(Matrix(mu.row(k)), Matrix(f.data().row(best)));
  }
}

TEST(InitTopK, FewerSamplesThanMGivesGlobalMean) {
  std::mt19937_64 rng(7);
  const auto f = EmbeddingMatrix::from_rows(testutil::random_unit_rows(rng, 3, 4));
  const SimplexAssignments y{testutil::random_simplex_rows(rng, 3, 2)};
  const Matrix mu = init_prototypes_topk(f, y, 8);
  const Eigen::RowVectorXd mean = f.data().colwise().mean();
  for (Eigen::Index k = 0; k < 2; ++k) EXPECT_LT((mu.row(k) - mean).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(InitTopK, MatchesExhaustiveSortOracle) {
  std::mt19937_64 rng(8);
  const auto f = EmbeddingMatrix::from_rows(testutil::random_unit_rows(rng, 5, 4));
  Matrix yz = testutil::random_simplex_rows(rng, 5, 2);
  yz(3, 0) = yz(1, 0);  // force a tie in class 0
  yz(3, 1) = 1.0 - yz(3, 0);
  const SimplexAssignments y{yz};
  for (std::size_t m : {1u, 2u, 3u, 4u, 5u}) {
    const Matrix mu = init_prototypes_topk(f, y, m);
    for (Eigen::Index k = 0; k < 2; ++k) {
      std::vector<std::pair<double, Eigen::Index>> ranked;
      for (Eigen::Index i = 0; i < 5; ++i) ranked.emplace_back(-yz(i, k), i);
      std::sort(ranked.begin(), ranked.end());
      Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(4);
      for (std::size_t r = 0; r < m; ++r) acc += f.data().row(ranked[r].second);
      acc /= static_cast<double>(m);
      EXPECT_EQ(Matrix(mu.row(k)), Matrix(acc)) << "m=" << m << " k=" << k;
    }
  }
}

TEST(InitTopK, RowsInsideUnitBall) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = EmbeddingMatrix::from_rows(testutil::random_unit_rows(rng, 40, 6));
    const SimplexAssignments y{testutil::random_simplex_rows(rng, 40, 4)};
    const Matrix mu = init_prototypes_topk(f, y, 8);
    for (Eigen::Index k = 0; k < 4; ++k) EXPECT_LE(mu.row(k).norm(), 1.0 + 1e-12);
  }
}

TEST(InitSupport, OneShotAndDuplicates) {
  std::mt19937_64 rng(10);
  const Matrix s = testutil::random_unit_rows(rng, 2, 5);
  const auto one = EmbeddingMatrix::from_rows(s);
  const Matrix mu = init_prototypes_support(one, {1, 0}, 2);
  EXPECT_EQ(Matrix(mu.row(0)), Matrix(s.row(1)));
  EXPECT_EQ(Matrix(mu.row(1)), Matrix(s.row(0)));

  Matrix dup(4, 5);
  dup << s.row(0), s.row(0), s.row(1), s.row(1);
  const Matrix mu2 = init_prototypes_support(EmbeddingMatrix::from_rows(dup), {0, 0, 1, 1}, 2);
  EXPECT_EQ(Matrix(mu2.row(0)), Matrix(s.row(0)));
  EXPECT_EQ(Matrix(mu2.row(1)), Matrix(s.row(1)));
}

TEST(InitSupport, MatchesArithmeticMeanOracle) {
  std::mt19937_64 rng(11);
  const Matrix s = testutil::random_unit_rows(rng, 8, 6);
  const Labels labels{0, 1, 1, 0, 1, 0, 0, 1};
  const Matrix mu = init_prototypes_support(EmbeddingMatrix::from_rows(s), labels, 2);
  for (Eigen::Index k = 0; k < 2; ++k) {
    for (Eigen::Index c = 0; c < 6; ++c) {
      long double acc = 0;
      int n = 0;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == k) {
          acc += s(static_cast<Eigen::Index>(i), c);
          ++n;
        }
      }
      EXPECT_NEAR(mu(k, c), static_cast<double>(acc / n), 1e-12);
    }
  }
}

TEST(InitSupport, EmptyClassThrows) {
  std::mt19937_64 rng(12);
  const auto s = EmbeddingMatrix::from_rows(testutil::random_unit_rows(rng, 2, 3));
  try {
    init_prototypes_support(s, {0, 0}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyClass);
  }
}
