#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pinet/data/karate.hpp"
#include "pinet/netcore.hpp"
#include "test_util.hpp"

using namespace pinet;

TEST(ExpectedAdjacency, TwoBlockModelMatchesFormula) {
  const auto spec = SbmSpec::from_sizes(model_probabilities(Model::model1, 0.1), {2, 2});
  Matrix want(4, 4);
  want << .3, .3, .1, .1, .3, .3, .1, .1, .1, .1, .3, .3, .1, .1, .3, .3;
  EXPECT_LT((expected_adjacency(spec) - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ExpectedAdjacency, SingleBlockIsConstant) {
  Matrix P(1, 1);
  P << 0.37;
  const auto M = expected_adjacency(SbmSpec::balanced(P, 5));
  EXPECT_TRUE((M.array() == 0.37).all());
}

TEST(ExpectedAdjacency, ThreeBlockModelBlocks) {
  const auto spec = SbmSpec::from_sizes(model_probabilities(Model::model2, 0.1), {2, 2, 2});
  const auto M = expected_adjacency(spec);
  const double want[3][3] = {{.3, .15, .1}, {.15, .3, .15}, {.1, .15, .3}};
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 6; ++j) EXPECT_NEAR(M(i, j), want[i / 2][j / 2], 1e-15);
}

TEST(ExpectedAdjacency, RankAndDistinctRows) {
  const auto spec = make_model(Model::model3, 30, 0.2);
  const auto M = expected_adjacency(spec);
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) rank += s(i) > 1e-10 * s(0) ? 1 : 0;
  EXPECT_EQ(rank, 3);
  std::vector<std::vector<double>> rows;
  for (Index i = 0; i < M.rows(); ++i) {
    std::vector<double> r;
    for (Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
    if (std::find(rows.begin(), rows.end(), r) == rows.end()) rows.push_back(r);
  }
  EXPECT_EQ(rows.size(), 3u);
}

TEST(SbmSpec, SizesUseFloorWithRemainderLast) {
  const auto spec = make_model(Model::model2, 10, 0.1);
  EXPECT_EQ(spec.block_sizes(), (std::vector<Index>{3, 3, 4}));
  EXPECT_EQ(spec.membership.front(), 0);
}

TEST(SbmSpec, RejectsInvalid) {
  Matrix P(2, 2);
  P << .3, .2, .1, .3;
  EXPECT_THROW(SbmSpec::balanced(P, 4).validate(), InvalidSpec);
  P << .3, 1.2, 1.2, .3;
  EXPECT_THROW(SbmSpec::balanced(P, 4).validate(), InvalidSpec);
  P << .3, .1, .1, .3;
  EXPECT_THROW(SbmSpec::from_sizes(P, {4, 0}).validate(), InvalidSpec);
}

TEST(SampleAdjacency, ExtremeProbabilities) {
  Matrix ones = Matrix::Ones(2, 2), zeros = Matrix::Zero(2, 2);
  const auto full = sample_adjacency(SbmSpec::balanced(ones, 7), 3);
  EXPECT_EQ(full.edge_count(), 21);
  for (Index i = 0; i < 7; ++i) EXPECT_EQ(full(i, i), 0);
  const auto loops = sample_adjacency(SbmSpec::balanced(ones, 7), 3, DiagonalMode::bernoulli);
  for (Index i = 0; i < 7; ++i) EXPECT_EQ(loops(i, i), 1);
  EXPECT_EQ(sample_adjacency(SbmSpec::balanced(zeros, 7), 3).edge_count(), 0);
}

TEST(SampleAdjacency, DeterministicGivenSeed) {
  const auto spec = make_model(Model::model1, 120, 0.1);
  EXPECT_EQ(sample_adjacency(spec, 42), sample_adjacency(spec, 42));
  EXPECT_FALSE(sample_adjacency(spec, 42) == sample_adjacency(spec, 43));
  EXPECT_EQ(sample_adjacency(spec, 42, DiagonalMode::bernoulli), sample_adjacency(spec, 42, DiagonalMode::bernoulli));
}

TEST(SampleAdjacency, WithinBlockDensityNearProbability) {
  const auto spec = make_model(Model::model1, 300, 0.1);
  double sum = 0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    const auto A = sample_adjacency(spec, 1000 + s);
    Index e = 0;
    for (Index j = 0; j < 150; ++j)
      for (Index i = 0; i < j; ++i) e += A(i, j);
    sum += static_cast<double>(e) / (150.0 * 149.0 / 2.0);
  }
  EXPECT_NEAR(sum / seeds, 0.3, 0.01);
}

TEST(SampleAdjacency, EntryMomentsWithinFourStandardErrors) {
  const auto spec = SbmSpec::from_sizes(model_probabilities(Model::model2, 0.2), {2, 2, 2});
  const auto EA = expected_adjacency(spec);
  const int seeds = 2000;
  Matrix mean = Matrix::Zero(6, 6);
  for (int s = 0; s < seeds; ++s) mean += sample_adjacency(spec, 77 + s).to_dense();
  mean /= seeds;
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 6; ++j) {
      if (i == j) continue;
      const double p = EA(i, j), se = std::sqrt(p * (1 - p) / seeds);
      EXPECT_LE(std::abs(mean(i, j) - p), 4 * se) << i << "," << j;
    }
}

TEST(AdjacencyMatrix, RejectsInvalidEntries) {
  BinaryMatrix M = BinaryMatrix::Zero(3, 3);
  M(0, 1) = 1;
  EXPECT_THROW(AdjacencyMatrix::from_entries(M), InvalidGraph);
  M(1, 0) = 1;
  M(2, 2) = 1;
  EXPECT_THROW(AdjacencyMatrix::from_entries(M), InvalidGraph);
  EXPECT_NO_THROW(AdjacencyMatrix::from_entries(M, DiagonalMode::bernoulli));
  M(2, 2) = 2;
  EXPECT_THROW(AdjacencyMatrix::from_entries(M, DiagonalMode::bernoulli), InvalidGraph);
}

TEST(EdgeList, PathFromTwoLines) {
  std::istringstream in("1 2\n1 3\n");
  const auto A = read_edge_list(in);
  EXPECT_EQ(A.n(), 3);
  EXPECT_EQ(A.edge_count(), 2);
  EXPECT_TRUE(A.has_edge(0, 1));
  EXPECT_TRUE(A.has_edge(0, 2));
  EXPECT_FALSE(A.has_edge(1, 2));
}

TEST(EdgeList, SelfLoopDroppedAndDuplicatesCollapse) {
  std::istringstream in("# comment\n1 2\n2 2\n2 1\n1 2\n2 3\n");
  const auto A = read_edge_list(in);
  EXPECT_EQ(A.edge_count(), 2);
  EXPECT_EQ(A(1, 1), 0);
}

TEST(EdgeList, ZeroBase) {
  EdgeListOptions opt;
  opt.index_base = 0;
  std::istringstream in("0 1\n1 2\n");
  const auto A = read_edge_list(in, opt);
  EXPECT_EQ(A.n(), 3);
  EXPECT_TRUE(A.has_edge(1, 2));
}

TEST(EdgeList, ParseErrorReportsLine) {
  std::istringstream in("1 2\n1 x\n");
  try {
    read_edge_list(in);
    FAIL() << "no exception";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(EdgeList, IdOutsideDeclaredRange) {
  std::istringstream in("# nodes 3\n1 4\n");
  EXPECT_THROW(read_edge_list(in), IndexError);
  std::istringstream in0("0 1\n");
  EXPECT_THROW(read_edge_list(in0), IndexError);
}

TEST(EdgeList, UnsymmetrizedKeepsOnlyReciprocatedPairs) {
  EdgeListOptions opt;
  opt.symmetrize = false;
  std::istringstream in("1 2\n2 1\n2 3\n");
  const auto A = read_edge_list(in, opt);
  EXPECT_TRUE(A.has_edge(0, 1));
  EXPECT_FALSE(A.has_edge(1, 2));
}

TEST(EdgeList, RoundTripOfSampledGraphs) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto A = sample_adjacency(make_model(Model::model2, 45, 0.15), seed);
    std::stringstream buf;
    write_edge_list(A, buf);
    EXPECT_EQ(read_edge_list(buf), A);
  }
}

TEST(EdgeList, KarateFixtureFile) {
  const auto A = load_edge_list(test_data("karate.edges"));
  EXPECT_EQ(A.n(), 34);
  EXPECT_EQ(A.edge_count(), 78);
  EXPECT_EQ(A, data::karate_graph());
  EXPECT_THROW(load_edge_list(test_data("missing.edges")), IoError);
}

TEST(Membership, CsvAlignment) {
  std::istringstream in("node_id,community\n3,b\n1,a\n2,b\n");
  const auto m = read_membership_csv(in);
  AdjacencyMatrix g(4);
  g.set_labels({"1", "2", "3", "4"});
  EXPECT_EQ(align_membership(g, m), (std::vector<Index>{0, 1, 1, -1}));
}

TEST(Components, ConnectedGraphIsIdentity) {
  const auto g = data::karate_graph();
  const auto sub = largest_connected_component(g);
  ASSERT_EQ(sub.graph.n(), 34);
  for (Index i = 0; i < 34; ++i) EXPECT_EQ(sub.old_to_new[i], i);
}

TEST(Components, TieGoesToSmallestNode) {
  const auto g = AdjacencyMatrix::from_edges(7, {{1, 2}, {2, 3}, {1, 3}, {4, 5}, {5, 6}, {4, 6}});
  const auto sub = largest_connected_component(g);
  EXPECT_EQ(sub.new_to_old, (std::vector<Index>{1, 2, 3}));
  EXPECT_EQ(sub.old_to_new[0], -1);
  EXPECT_EQ(sub.graph.edge_count(), 3);
}

TEST(DegreeHistogram, SmallCases) {
  EXPECT_EQ(degree_histogram(AdjacencyMatrix(3)), (std::map<Index, Index>{{0, 3}}));
  EXPECT_EQ(degree_histogram(AdjacencyMatrix::from_edges(3, {{0, 1}, {1, 2}, {0, 2}})),
            (std::map<Index, Index>{{2, 3}}));
  EXPECT_EQ(degree_histogram(toy_graph()), (std::map<Index, Index>{{2, 4}, {3, 2}}));
}

TEST(DegreeHistogram, CountsSumToN) {
  const auto A = sample_adjacency(make_model(Model::model1, 200, 0.05), 5);
  Index total = 0;
  for (auto [d, c] : degree_histogram(A)) total += c;
  EXPECT_EQ(total, 200);
}

TEST(Conditions, ModelOne) {
  const auto r = check_conditions(make_model(Model::model1, 100, 0.1), 0);
  EXPECT_NEAR(r.p_n, 0.3, 1e-15);
  EXPECT_NEAR(r.sigma_K_over_pn, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.min_block_fraction, 0.5, 1e-15);
  EXPECT_TRUE(r.gap_ok);
}

TEST(Conditions, SingleBlockAndNarrowGap) {
  Matrix P1(1, 1);
  P1 << 0.2;
  const auto r1 = check_conditions(SbmSpec::balanced(P1, 10), 0);
  EXPECT_NEAR(r1.sigma_K_over_pn, 1.0, 1e-15);
  EXPECT_TRUE(r1.gap_ok);
  Matrix P(2, 2);
  P << .3, .299, .299, .3;
  EXPECT_FALSE(check_conditions(SbmSpec::balanced(P, 10), 0).gap_ok);
}
