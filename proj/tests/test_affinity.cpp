#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "test_util.hpp"
#include "transduct/affinity.hpp"

using namespace transduct;

TEST(Knn, TwoNodesEachOtherOnly) {
  std::mt19937_64 rng(1);
  const Matrix f = testutil::random_unit_rows(rng, 2, 4);
  const AffinityGraph g = build_knn(EmbeddingMatrix::from_rows(f), 3);
  ASSERT_EQ(g.degree(0), 1u);
  ASSERT_EQ(g.degree(1), 1u);
  EXPECT_EQ(g.begin(0)->target, 1u);
  EXPECT_EQ(g.begin(1)->target, 0u);
  EXPECT_DOUBLE_EQ(g.begin(0)->weight, std::max(0.0, f.row(0).dot(f.row(1))));
}

TEST(Knn, AntipodalWeightClippedToZero) {
  Matrix f(2, 3);
  f << 1, 0, 0, -1, 0, 0;
  const AffinityGraph g = build_knn(EmbeddingMatrix::from_rows(f), 3);
  EXPECT_EQ(g.begin(0)->weight, 0.0);
  EXPECT_EQ(g.begin(1)->weight, 0.0);
}

TEST(Knn, MatchesBruteForceOracle) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    std::mt19937_64 rng(seed);
    const Matrix f = testutil::random_unit_rows(rng, seed == 1 ? 5 : 60, 4);
    const auto ref = oracles::brute_force_knn(testutil::nested(f), 3);
    const AffinityGraph g = build_knn(EmbeddingMatrix::from_rows(f), 3);
    for (std::size_t i = 0; i < g.n_nodes; ++i) {
      ASSERT_EQ(g.degree(i), ref[i].size());
      for (std::size_t r = 0; r < ref[i].size(); ++r) {
        EXPECT_EQ(g.begin(i)[r].target, ref[i][r].first);
        EXPECT_NEAR(g.begin(i)[r].weight, ref[i][r].second, 1e-15);
      }
    }
  }
}

TEST(Knn, InvariantsOnRandomInputs) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + trial * 3;
    const auto f = EmbeddingMatrix::from_rows(testutil::random_unit_rows(rng, n, 5));
    for (std::size_t k : {0u, 1u, 3u, 100u}) {
      const AffinityGraph g = build_knn(f, k);
      for (std::size_t i = 0; i < g.n_nodes; ++i) {
        EXPECT_EQ(g.degree(i), std::min<std::size_t>(k, static_cast<std::size_t>(n - 1)));
        for (const Edge* e = g.begin(i); e != g.end(i); ++e) {
          EXPECT_NE(e->target, i);
          EXPECT_GE(e->weight, 0.0);
          EXPECT_LE(e->weight, 1.0 + 1e-9);
          if (e != g.begin(i)) EXPECT_GE((e - 1)->weight, e->weight);
        }
      }
    }
  }
}

TEST(Knn, DuplicatePointsTieBreakByIndex) {
  Matrix f(4, 2);
  f << 1, 0, 1, 0, 1, 0, 0, 1;
  const AffinityGraph g = build_knn(EmbeddingMatrix::from_rows(f), 2);
  EXPECT_EQ(g.begin(3)[0].target, 0u);
  EXPECT_EQ(g.begin(3)[1].target, 1u);
  EXPECT_EQ(g.begin(1)[0].target, 0u);
  EXPECT_EQ(g.begin(1)[1].target, 2u);
}

TEST(Symmetrize, AveragesBothDirections) {
  std::mt19937_64 rng(8);
  const auto f = EmbeddingMatrix::from_rows(testutil::random_unit_rows(rng, 30, 4));
  const AffinityGraph g = build_knn(f, 3);
  const AffinityGraph s = symmetrize(g);
  auto weight = [](const AffinityGraph& gr, std::size_t i, std::size_t j) {
    for (const Edge* e = gr.begin(i); e != gr.end(i); ++e) {
      if (e->target == j) return e->weight;
    }
    return 0.0;
  };
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = 0; j < 30; ++j) {
      EXPECT_DOUBLE_EQ(weight(s, i, j), weight(s, j, i));
      EXPECT_NEAR(weight(s, i, j), 0.5 * (weight(g, i, j) + weight(g, j, i)), 1e-15);
    }
  }
}

TEST(GraphDump, OneLinePerEdge) {
  Matrix f(3, 2);
  f << 1, 0, 0, 1, 1, 0;
  const AffinityGraph g = build_knn(EmbeddingMatrix::from_rows(f), 1);
  std::ostringstream out;
  write_graph(g, out);
  EXPECT_EQ(out.str(), "0 2 1\n1 0 0\n2 0 1\n");
}
