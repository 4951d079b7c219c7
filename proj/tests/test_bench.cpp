#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pinet/bench.hpp"
#include "test_util.hpp"

using namespace pinet;

namespace {

ExperimentGrid small_grid() {
  ExperimentGrid g;
  g.ns = {200, 300};
  g.qs = {QRule::fixed(0.2), QRule::inv_sqrt_n()};
  g.reps = 3;
  g.seed = 11;
  return g;
}

std::string csv_of(const GridResult& r) {
  std::ostringstream os;
  emit_csv(r, os);
  return os.str();
}

bool same_row(const ReplicateRow& a, const ReplicateRow& b) {
  if (a.n != b.n || a.q_rule != b.q_rule || a.q != b.q || a.rep != b.rep || a.seed != b.seed || a.failed != b.failed)
    return false;
  for (int m = 0; m < 4; ++m) {
    const bool na = std::isnan(a.metrics[m]), nb = std::isnan(b.metrics[m]);
    if (na != nb || (!na && a.metrics[m] != b.metrics[m])) return false;
  }
  return true;
}

}  // namespace

TEST(QRule, ValuesUseNaturalLog) {
  const double n = 300, r = std::log(n) / n;
  EXPECT_DOUBLE_EQ(QRule::fixed(0.1).evaluate(300), 0.1);
  EXPECT_DOUBLE_EQ(QRule::sqrt_logn_over_n().evaluate(300), std::sqrt(r));
  EXPECT_DOUBLE_EQ(QRule::quarter_root_logn_over_n_half().evaluate(300), std::pow(r, 0.25) / 2);
  EXPECT_DOUBLE_EQ(QRule::inv_sqrt_n().evaluate(300), 1 / std::sqrt(n));
  EXPECT_NEAR(QRule::inv_sqrt_n().evaluate(300), 0.0577350, 1e-7);
}

TEST(QRule, ParseAndNames) {
  for (const auto& q : QRule::default_rules()) {
    const auto p = QRule::parse(q.name());
    EXPECT_EQ(p.name(), q.name());
    EXPECT_EQ(p.key(), q.key());
  }
  EXPECT_EQ(QRule::parse("0.25").name(), "fixed(0.25)");
  EXPECT_EQ(QRule::parse("fixed(0.1)").value, 0.1);
  EXPECT_NE(QRule::fixed(0.1).key(), QRule::fixed(0.2).key());
  EXPECT_THROW(QRule::parse("log_n"), InvalidSpec);
  EXPECT_THROW(QRule::parse("1.5"), InvalidSpec);
  EXPECT_THROW(QRule::parse("0.1x"), InvalidSpec);
}

TEST(Grid, ValidateRejectsBadSettings) {
  ExperimentGrid g = small_grid();
  g.reps = 0;
  EXPECT_THROW(g.validate(), InvalidSpec);
  g = small_grid();
  g.qs = {QRule::fixed(0.4)};  // model 1 diagonal is 3q
  EXPECT_THROW(g.validate(), InvalidSpec);
  g = small_grid();
  g.anchor = 500;
  EXPECT_THROW(g.validate(), InvalidSpec);
  EXPECT_NO_THROW(small_grid().validate());
}

TEST(Csv, EmptyResultIsHeaderOnly) {
  GridResult r;
  r.model = "model1";
  EXPECT_EQ(csv_of(r), "model,n,q_rule,q_value,metric,mean,stderr,reps,failures\n");
}

TEST(Csv, FourRowsPerCellInMetricOrder) {
  ExperimentGrid g = small_grid();
  g.ns = {200};
  g.qs = {QRule::fixed(0.2)};
  const auto r = run_grid(g);
  std::istringstream in(csv_of(r));
  std::string line;
  std::getline(in, line);
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  for (int m = 0; m < 4; ++m) {
    EXPECT_EQ(lines[m].rfind("model1,200,fixed(0.2),0.2," + std::string(metric_names()[m]) + ",", 0), 0u) << lines[m];
    EXPECT_EQ(lines[m].substr(lines[m].size() - 4), ",3,0");
  }
}

TEST(Csv, SkippedMetricsPrintNA) {
  ExperimentGrid g = small_grid();
  g.ns = {200};
  g.qs = {QRule::fixed(0.2)};
  g.run_partial = false;
  g.run_full = false;
  const auto csv = csv_of(run_grid(g));
  EXPECT_NE(csv.find("misclustering_partial,NA,NA,0,0"), std::string::npos) << csv;
  EXPECT_NE(csv.find("misclustering_full,NA,NA,0,0"), std::string::npos) << csv;
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "NA");
  EXPECT_EQ(format_number(0.1), "0.1");
}

TEST(Grid, ByteIdenticalReruns) {
  const auto g = small_grid();
  const auto a = run_grid(g), b = run_grid(g);
  EXPECT_EQ(csv_of(a), csv_of(b));
  std::ostringstream ja, jb;
  emit_json(a, ja);
  emit_json(b, jb);
  EXPECT_EQ(ja.str(), jb.str());
}

TEST(Grid, ThreadCountDoesNotChangeOutput) {
  auto g = small_grid();
  const auto one = csv_of(run_grid(g));
  g.threads = 4;
  EXPECT_EQ(csv_of(run_grid(g)), one);
}

TEST(Grid, SingleCellMatchesFullGrid) {
  const auto g = small_grid();
  const auto full = run_grid(g);
  auto cell = g;
  cell.ns = {300};
  cell.qs = {QRule::inv_sqrt_n()};
  const auto single = run_grid(cell);
  ASSERT_EQ(single.rows.size(), 3u);
  int matched = 0;
  for (const auto& row : full.rows)
    if (row.n == 300 && row.q_rule == "inv_sqrt_n") EXPECT_TRUE(same_row(row, single.rows[matched++]));
  EXPECT_EQ(matched, 3);
  const auto& a = find_cell(full, 300, "inv_sqrt_n");
  const auto& b = single.cells.front();
  for (int m = 0; m < 4; ++m) EXPECT_EQ(a.metrics[m].mean, b.metrics[m].mean);
}

TEST(Grid, CellSummaryMatchesRows) {
  const auto r = run_grid(small_grid());
  ASSERT_EQ(r.cells.size(), 4u);
  ASSERT_EQ(r.rows.size(), 12u);
  for (std::size_t c = 0; c < r.cells.size(); ++c) {
    for (int m = 0; m < 4; ++m) {
      double sum = 0, sq = 0;
      int k = 0;
      for (int rep = 0; rep < 3; ++rep) {
        const auto& row = r.rows[c * 3 + rep];
        if (row.failed) continue;
        sum += row.metrics[m];
        ++k;
      }
      const double mean = sum / k;
      for (int rep = 0; rep < 3; ++rep)
        if (!r.rows[c * 3 + rep].failed) sq += std::pow(r.rows[c * 3 + rep].metrics[m] - mean, 2);
      EXPECT_NEAR(r.cells[c].metrics[m].mean, mean, 1e-14);
      EXPECT_NEAR(r.cells[c].metrics[m].stderr_, std::sqrt(sq / (k - 1)) / std::sqrt(k), 1e-12);
      EXPECT_EQ(r.cells[c].metrics[m].reps, k);
    }
  }
  EXPECT_THROW(find_cell(r, 999, "inv_sqrt_n"), std::exception);
}

TEST(Grid, FailedReplicatesAreCountedNotAveraged) {
  // Anchor in a nearly empty graph has too few neighbours.
  ExperimentGrid g;
  g.ns = {40};
  g.qs = {QRule::fixed(0.01)};
  g.reps = 5;
  g.seed = 3;
  const auto r = run_grid(g);
  const auto& c = r.cells.front();
  int failed = 0;
  for (const auto& row : r.rows) {
    failed += row.failed;
    if (row.failed) {
      EXPECT_FALSE(row.failure.empty());
      for (double v : row.metrics) EXPECT_TRUE(std::isnan(v));
    }
  }
  EXPECT_GT(failed, 0);
  EXPECT_EQ(c.failures, failed);
  EXPECT_EQ(c.metrics[0].reps, 5 - failed);
}

TEST(Grid, FullViewNotMateriallyWorse) {
  ExperimentGrid g;
  g.ns = {600};
  g.qs = {QRule::fixed(0.1), QRule::sqrt_logn_over_n()};
  g.reps = 5;
  g.seed = 21;
  const auto r = run_grid(g);
  for (const auto& c : r.cells) EXPECT_LE(c.metrics[3].mean, c.metrics[2].mean + 0.02) << c.q_rule;
}

TEST(Json, GridFields) {
  ExperimentGrid g = small_grid();
  g.ns = {200};
  g.qs = {QRule::fixed(0.2)};
  g.run_full = false;
  const auto j = to_json(run_grid(g));
  EXPECT_EQ(j["model"], "model1");
  ASSERT_EQ(j["cells"].size(), 1u);
  ASSERT_EQ(j["replicates"].size(), 3u);
  EXPECT_TRUE(j["replicates"][0]["misclustering_full"].is_null());
  EXPECT_TRUE(j["cells"][0]["metrics"]["observed_edge_ratio"]["mean"].is_number());
}

TEST(TheoryCheck, ModelOneHasRankFour) {
  for (Index n : {200, 400})
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto r = check_theory_instance(make_model(Model::model1, n, 0.1), 100 + s, 0.1);
      EXPECT_TRUE(r.pass) << r.error;
      EXPECT_EQ(r.rank_BE, 4);
      EXPECT_GT(r.gap_ratio, 1e6);
      EXPECT_LE(r.eigen_residual_max, 1e-8);
    }
}

TEST(TheoryCheck, SingleBlockClosedForm) {
  Matrix P(1, 1);
  P << 0.2;
  const auto r = check_theory_instance(SbmSpec::balanced(P, 150), 4, 0.2);
  EXPECT_TRUE(r.pass) << r.error;
  EXPECT_EQ(r.rank_BE, 2);
  EXPECT_LE(r.closed_form_error, 1e-10);
  // Scalar quadratic: s = 1, n = 2 gives roots (1 ± sqrt 5)/2 scaled by p.
  const auto roots = closed_form_roots_k1(1.0, 1.0, 2.0);
  EXPECT_NEAR(roots[0], (1 - std::sqrt(5.0)) / 2, 1e-15);
  EXPECT_NEAR(roots[1], (1 + std::sqrt(5.0)) / 2, 1e-15);
}

TEST(TheoryCheck, SmallRunAndJsonShape) {
  TheoryCheckConfig cfg;
  cfg.instances = 6;
  cfg.seed = 9;
  const auto rep = run_theory_check(cfg);
  EXPECT_EQ(rep.instances.size(), 6u);
  EXPECT_TRUE(rep.pass);
  const auto j = to_json(rep);
  EXPECT_EQ(j["total"], 6);
  for (const char* key : {"K", "n", "q", "seed", "invertible", "rank_BE", "gap_ratio", "root_residuals",
                          "orthogonality_max", "norm_ratios", "m_fraction", "jittered", "pass"})
    EXPECT_TRUE(j["instances"][0].contains(key)) << key;
}

TEST(Karate, PublishedRows) {
  const auto rows = run_karate({"H", "32", "20"}, {{"A", "20"}});
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].observed_edge_ratio.num, 51);
  EXPECT_EQ(rows[0].observed_edge_ratio.den, 78);
  EXPECT_NEAR(rows[0].observed_edge_ratio.value(), 0.6538, 5e-5);
  EXPECT_EQ(rows[1].wrong, 0);
  EXPECT_LE(rows[2].wrong, 2);
  EXPECT_EQ(rows[5].scenario, "deleted");
  EXPECT_EQ(rows[5].nodes_within_depth, 18);
  EXPECT_GT(rows[5].wrong, rows[2].wrong);
  EXPECT_EQ(rows[3].observed_edge_ratio.den, 77);
}

TEST(Karate, UnknownAnchorAndCsv) {
  EXPECT_THROW(run_karate({"35"}), UnknownAnchor);
  EXPECT_THROW(run_karate({"Z"}), UnknownAnchor);
  std::ostringstream os;
  emit_karate_csv(run_karate({"H"}), os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "anchor,scenario,observed_edge_ratio,nodes_within_depth,wrong");
  EXPECT_NE(os.str().find("H,original,0.6538461538,"), std::string::npos) << os.str();
}

TEST(Polblogs, FixtureLargestComponent) {
  const auto rep = run_polblogs(test_data("blogs_small.edges"), test_data("blogs_small_labels.csv"), {"1", "50"});
  EXPECT_EQ(rep.lcc_nodes, 80);
  Index total = 0;
  for (auto [deg, count] : rep.degree_histogram_lcc) total += count;
  EXPECT_EQ(total, 80);
  ASSERT_EQ(rep.rows.size(), 2u);
  for (const auto& row : rep.rows) {
    EXPECT_FALSE(row.degenerate) << row.note;
    EXPECT_GT(row.nodes_observed, 1);
    EXPECT_LE(row.misclustering.value(), 0.5);
    EXPECT_GT(row.within_subnet_edge_ratio.value(), 0.0);
    EXPECT_LE(row.within_subnet_edge_ratio.value(), 1.0);
  }
  Index view_total = 0;
  for (auto [deg, count] : rep.degree_histogram_view) view_total += count;
  EXPECT_EQ(view_total, rep.rows[0].nodes_observed);
  const auto j = to_json(rep);
  EXPECT_EQ(j["lcc_nodes"], 80);
}

TEST(Polblogs, AnchorOutsideComponentOrUnknown) {
  const auto path = test_data("blogs_small.edges"), labels = test_data("blogs_small_labels.csv");
  EXPECT_THROW(run_polblogs(path, labels, {"81"}), AnchorOutsideLCC);
  EXPECT_THROW(run_polblogs(path, labels, {"84"}), AnchorOutsideLCC);
  EXPECT_THROW(run_polblogs(path, labels, {"999"}), UnknownAnchor);
}

TEST(Polblogs, LeafAnchorIsDegenerate) {
  // Path 1-2-3-4-5: anchor 1 sees only its single neighbour.
  auto g = AdjacencyMatrix::from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  g.set_labels({"1", "2", "3", "4", "5"});
  const std::map<std::string, std::string> labels{{"1", "0"}, {"2", "0"}, {"3", "1"}, {"4", "1"}, {"5", "1"}};
  const auto rep = run_polblogs(g, labels, {"1"});
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_TRUE(rep.rows[0].degenerate);
  EXPECT_TRUE(to_json(rep)["anchors"][0]["misclustering"].is_null());
}
