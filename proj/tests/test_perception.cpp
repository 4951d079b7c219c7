#include <gtest/gtest.h>

#include "pinet/data/karate.hpp"
#include "pinet/perception.hpp"
#include "pinet/random.hpp"
#include "test_util.hpp"

using namespace pinet;

namespace {

// b_ij = a_ij (1 - 1(a_ai = 0) 1(a_aj = 0)) with the anchor's own pairs kept.
BinaryMatrix indicator_oracle(const AdjacencyMatrix& A, Index anchor) {
  const Index n = A.n();
  BinaryMatrix B = BinaryMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const bool hidden = !A(anchor, i) && !A(anchor, j) && i != anchor && j != anchor;
      B(i, j) = A(i, j) && !hidden ? 1 : 0;
    }
  return B;
}

AdjacencyMatrix random_graph(Index n, double p, std::uint64_t seed, DiagonalMode mode = DiagonalMode::zero) {
  Rng rng(seed);
  AdjacencyMatrix A(n, mode);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i <= j; ++i)
      if ((i != j || mode == DiagonalMode::bernoulli) && rng.bernoulli(p)) A.set_edge(i, j, true);
  return A;
}

}  // namespace

TEST(PerceiveBased, ToyDepthTwoMatchesPrintedMatrix) {
  BinaryMatrix want(6, 6);
  want << 0, 1, 1, 1, 0, 0,
          1, 0, 1, 0, 0, 0,
          1, 1, 0, 0, 0, 0,
          1, 0, 0, 0, 1, 1,
          0, 0, 0, 1, 0, 0,
          0, 0, 0, 1, 0, 0;
  const auto view = perceive_based(toy_graph(), 0, 2);
  EXPECT_EQ(view.B.entries(), want);
  EXPECT_EQ(view.neighbor, (std::vector<std::uint8_t>{0, 1, 1, 1, 0, 0}));
}

TEST(PerceiveBased, ToyDepthOneKeepsAnchorEdges) {
  const auto view = perceive_based(toy_graph(), 0, 1);
  EXPECT_EQ(view.B.edge_count(), 3);
  for (Index j : {1, 2, 3}) EXPECT_TRUE(view.B.has_edge(0, j));
}

TEST(PerceiveBased, IsolatedAnchorSeesNothing) {
  auto A = toy_graph();
  A.set_edge(0, 1, false);
  A.set_edge(0, 2, false);
  A.set_edge(0, 3, false);
  const auto view = perceive_based(A, 0);
  EXPECT_EQ(view.B.edge_count(), 0);
  const auto within = perceive_within(view);
  EXPECT_EQ(within.graph.n(), 1);
  EXPECT_EQ(within.new_to_old[0], 0);
}

TEST(PerceiveBased, RejectsBadDepthAndAnchor) {
  EXPECT_THROW(perceive_based(toy_graph(), 0, 3), DepthUnsupported);
  EXPECT_THROW(perceive_based(toy_graph(), 0, 0), DepthUnsupported);
  EXPECT_THROW(perceive_based(toy_graph(), 6, 2), IndexError);
}

TEST(PerceiveBased, MatchesIndicatorOracleOnRandomGraphs) {
  Rng pick(99);
  for (int t = 0; t < 200; ++t) {
    const Index n = 2 + static_cast<Index>(pick.below(49));
    const auto mode = t % 4 == 0 ? DiagonalMode::bernoulli : DiagonalMode::zero;
    const auto A = random_graph(n, 0.05 + 0.4 * pick.uniform(), 500 + t, mode);
    const Index anchor = static_cast<Index>(pick.below(n));
    const auto view = perceive_based(A, anchor, 2);
    if (mode == DiagonalMode::zero) EXPECT_EQ(view.B.entries(), indicator_oracle(A, anchor)) << "trial " << t;
    EXPECT_EQ(view.B.entries(), detail::sandwich_formula(A.entries(), view.neighbor)) << "trial " << t;
  }
}

TEST(PerceiveBased, MonotoneInDepthAndAnchorRowComplete) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto A = random_graph(30, 0.15, s);
    const Index anchor = static_cast<Index>(s % 30);
    const auto v1 = perceive_based(A, anchor, 1), v2 = perceive_based(A, anchor, 2);
    for (Index i = 0; i < 30; ++i)
      for (Index j = 0; j < 30; ++j) {
        EXPECT_LE(v1.B(i, j), v2.B(i, j));
        EXPECT_LE(v2.B(i, j), A(i, j));
      }
    EXPECT_EQ(v1.B.entries().row(anchor), A.entries().row(anchor));
    EXPECT_EQ(v2.B.entries().row(anchor), A.entries().row(anchor));
  }
}

TEST(PerceiveWithin, ToyViews) {
  const auto w1 = perceive_within(perceive_based(toy_graph(), 0, 1));
  EXPECT_EQ(w1.new_to_old, (std::vector<Index>{0, 1, 2, 3}));
  EXPECT_EQ(w1.old_to_new[4], -1);
  const auto w2 = perceive_within(perceive_based(toy_graph(), 0, 2));
  EXPECT_EQ(w2.graph.n(), 6);
}

TEST(PerceiveWithin, KeepsAnchorAndDropsOnlyIsolated) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto A = random_graph(40, 0.03, 900 + s);
    const Index anchor = static_cast<Index>(s);
    const auto view = perceive_based(A, anchor);
    const auto w = perceive_within(view);
    EXPECT_GE(w.old_to_new[anchor], 0);
    for (Index i = 0; i < 40; ++i)
      if (w.old_to_new[i] < 0) {
        Index deg = 0;
        for (Index j = 0; j < 40; ++j) deg += j != i ? view.B(i, j) : 0;
        EXPECT_EQ(deg, 0);
      }
  }
}

TEST(ViewStats, ToyRatios) {
  const auto A = toy_graph();
  const auto st = view_stats(A, perceive_based(A, 0));
  EXPECT_EQ(st.observed_edge_ratio.num, 6);
  EXPECT_EQ(st.observed_edge_ratio.den, 7);
  EXPECT_DOUBLE_EQ(st.within_depth_fraction.value(), 1.0);
}

TEST(ViewStats, CompleteGraphSeesEverything) {
  AdjacencyMatrix K5(5);
  for (Index i = 0; i < 5; ++i)
    for (Index j = i + 1; j < 5; ++j) K5.set_edge(i, j, true);
  const auto st = view_stats(K5, perceive_based(K5, 2));
  EXPECT_DOUBLE_EQ(st.observed_edge_ratio.value(), 1.0);
  EXPECT_DOUBLE_EQ(st.within_depth_fraction.value(), 1.0);
  EXPECT_DOUBLE_EQ(st.within_subnet_edge_ratio.value(), 1.0);
}

TEST(ViewStats, EmptyGraphIsUndefined) {
  AdjacencyMatrix A(4);
  EXPECT_THROW(view_stats(A, perceive_based(A, 0)), DivisionUndefined);
}

TEST(ViewStats, RatiosOrderedAndBounded) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto A = random_graph(35, 0.08, 3000 + s);
    if (A.edge_count() == 0) continue;
    const auto st = view_stats(A, perceive_based(A, static_cast<Index>(s % 35)));
    for (double v : {st.observed_edge_ratio.value(), st.within_depth_fraction.value(),
                     st.within_subnet_edge_ratio.value()}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_GE(st.within_subnet_edge_ratio.value(), st.observed_edge_ratio.value());
  }
}

TEST(ViewStats, ModelOneEdgeRatioNearTable) {
  const auto spec = make_model(Model::model1, 300, 0.1);
  double sum = 0;
  for (int s = 0; s < 100; ++s) {
    const auto A = sample_adjacency(spec, 7000 + s);
    sum += view_stats(A, perceive_based(A, 0)).observed_edge_ratio.value();
  }
  EXPECT_NEAR(sum / 100, 0.3590, 0.02);
}

TEST(DeleteEdge, TriangleBecomesPath) {
  const auto tri = AdjacencyMatrix::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
  const auto path = delete_edge(tri, 0, 2);
  EXPECT_EQ(path.edge_count(), 2);
  EXPECT_FALSE(path.has_edge(2, 0));
  EXPECT_THROW(delete_edge(path, 0, 2), EdgeAbsent);
  EXPECT_EQ(add_edge(path, 0, 2), tri);
}

TEST(DeleteEdge, KarateOfficerAndTwenty) {
  const auto g = data::karate_graph();
  const auto h = delete_edge(g, data::karate_node("A"), data::karate_node("20"));
  EXPECT_EQ(h.edge_count(), 77);
}
