#pragma once

// Experiment harness: Monte-Carlo grids over SBM models, node counts and
// edge-probability rules; numerical checks of the major-term theory over
// random instances; the karate club and political blog case studies; and
// CSV/JSON emission.

#include <nlohmann/json.hpp>

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pinet/data/karate.hpp"
#include "pinet/detect.hpp"
#include "pinet/errors.hpp"
#include "pinet/netcore.hpp"
#include "pinet/perception.hpp"
#include "pinet/random.hpp"
#include "pinet/spectra.hpp"

namespace pinet {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// q rules

struct QRule {
  enum class Kind { fixed, sqrt_logn_over_n, quarter_root_logn_over_n_half, inv_sqrt_n };
  Kind kind = Kind::fixed;
  double value = 0.1;  ///< used by Kind::fixed only

  static QRule fixed(double v) { return {Kind::fixed, v}; }
  static QRule sqrt_logn_over_n() { return {Kind::sqrt_logn_over_n, 0}; }
  static QRule quarter_root_logn_over_n_half() { return {Kind::quarter_root_logn_over_n_half, 0}; }
  static QRule inv_sqrt_n() { return {Kind::inv_sqrt_n, 0}; }

  double evaluate(Index n) const {
    const double nn = static_cast<double>(n), r = std::log(nn) / nn;
    switch (kind) {
      case Kind::fixed: return value;
      case Kind::sqrt_logn_over_n: return std::sqrt(r);
      case Kind::quarter_root_logn_over_n_half: return std::pow(r, 0.25) / 2.0;
      case Kind::inv_sqrt_n: return 1.0 / std::sqrt(nn);
    }
    return value;
  }

  std::string name() const {
    switch (kind) {
      case Kind::fixed: {
        char buf[64];
        std::snprintf(buf, sizeof buf, "fixed(%.10g)", value);
        return buf;
      }
      case Kind::sqrt_logn_over_n: return "sqrt_logn_over_n";
      case Kind::quarter_root_logn_over_n_half: return "quarter_root_logn_over_n_half";
      case Kind::inv_sqrt_n: return "inv_sqrt_n";
    }
    return {};
  }

  /// Seed key: distinct for every rule and fixed value.
  std::uint64_t key() const {
    std::uint64_t bits = 0;
    if (kind == Kind::fixed) std::memcpy(&bits, &value, sizeof bits);
    return derive_seed({static_cast<std::uint64_t>(kind), bits});
  }

  /// Accepts a rule name, `fixed(v)`, or a bare number.
  static QRule parse(std::string_view s) {
    if (s == "sqrt_logn_over_n") return sqrt_logn_over_n();
    if (s == "quarter_root_logn_over_n_half") return quarter_root_logn_over_n_half();
    if (s == "inv_sqrt_n") return inv_sqrt_n();
    std::string_view num = s;
    if (s.size() > 7 && s.substr(0, 6) == "fixed(" && s.back() == ')') num = s.substr(6, s.size() - 7);
    try {
      std::size_t used = 0;
      const double v = std::stod(std::string(num), &used);
      if (used == num.size() && v > 0 && v < 1) return fixed(v);
    } catch (const std::exception&) {
    }
    throw InvalidSpec("unknown q rule '" + std::string(s) + "'");
  }

  static std::vector<QRule> default_rules() {
    return {fixed(0.1), sqrt_logn_over_n(), quarter_root_logn_over_n_half(), inv_sqrt_n()};
  }
};

// ---------------------------------------------------------------------------
// Simulation grid

struct ExperimentGrid {
  Model model = Model::model1;
  std::vector<Index> ns{300, 600, 900, 1200, 1500, 1800, 2100};
  std::vector<QRule> qs = QRule::default_rules();
  int reps = 100;
  std::uint64_t seed = 1;
  Index anchor = 0;           ///< first node unless set explicitly
  bool run_partial = true;    ///< two-stage detection on the anchor's view
  bool run_full = true;       ///< full-information baseline
  int threads = 1;
  DetectOptions detect;

  Index K() const { return model_probabilities(model, 0.1).rows(); }

  void validate() const {
    if (reps < 1) throw InvalidSpec("reps must be >= 1");
    if (ns.empty()) throw InvalidSpec("ns must be non-empty");
    if (qs.empty()) throw InvalidSpec("qs must be non-empty");
    for (Index n : ns) {
      if (n < 2 * K() || anchor < 0 || anchor >= n)
        throw InvalidSpec("n=" + std::to_string(n) + " too small for the model or anchor");
      for (const auto& q : qs) {
        const double v = q.evaluate(n);
        if (!(v > 0 && v < 1)) throw InvalidSpec("q rule " + q.name() + " leaves (0,1) at n=" + std::to_string(n));
        const Matrix P = model_probabilities(model, v);
        if (P.maxCoeff() > 1.0) throw InvalidSpec("probabilities exceed 1 for " + q.name());
      }
    }
  }
};

inline const std::array<const char*, 4>& metric_names() {
  static const std::array<const char*, 4> names{"observed_edge_ratio", "within_depth_fraction",
                                                "misclustering_partial", "misclustering_full"};
  return names;
}

struct ReplicateRow {
  Index n = 0;
  std::string q_rule;
  double q = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string failure;
  std::array<double, 4> metrics{};  ///< NaN when not computed
};

struct MetricSummary {
  double mean = 0;
  double stderr_ = 0;
  int reps = 0;  ///< replicates contributing
};

struct CellSummary {
  Index n = 0;
  std::string q_rule;
  double q = 0;
  int failures = 0;
  std::array<MetricSummary, 4> metrics{};
};

struct GridResult {
  std::string model;
  std::uint64_t seed = 0;
  std::vector<CellSummary> cells;
  std::vector<ReplicateRow> rows;  ///< cell-major, then replicate
};

inline std::uint64_t replicate_seed(std::uint64_t base, Model m, Index n, const QRule& q, int rep) {
  return derive_seed({base, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(n), q.key(),
                      static_cast<std::uint64_t>(rep)});
}

inline ReplicateRow run_replicate(const ExperimentGrid& g, Index n, const QRule& rule, int rep) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ReplicateRow row;
  row.n = n;
  row.q_rule = rule.name();
  row.q = rule.evaluate(n);
  row.rep = rep;
  row.seed = replicate_seed(g.seed, g.model, n, rule, rep);
  row.metrics.fill(nan);
  const Index K = g.K();
  try {
    const SbmSpec spec = make_model(g.model, n, row.q);
    const AdjacencyMatrix A = sample_adjacency(spec, derive_seed({row.seed, 0}));
    const PartialView view = perceive_based(A, g.anchor);
    const ViewStats st = view_stats(A, view);
    const Index adj = view.neighbor_count();
    if (adj < K) throw GroupTooSmall(GroupTooSmall::Group::adjacent, adj, K);
    if (n - adj < K) throw GroupTooSmall(GroupTooSmall::Group::non_adjacent, n - adj, K);
    row.metrics[0] = st.observed_edge_ratio.value();
    row.metrics[1] = st.within_depth_fraction.value();
    if (g.run_partial) {
      const auto det = detect_communities(view, K, derive_seed({row.seed, 1}), g.detect);
      row.metrics[2] = misclustering_rate(det.membership, spec.membership, K).value();
    }
    if (g.run_full) {
      const auto labels = spectral_cluster_full(A, K, derive_seed({row.seed, 2}), g.detect);
      row.metrics[3] = misclustering_rate(labels, spec.membership, K).value();
    }
  } catch (const Error& e) {
    row.failed = true;
    row.failure = e.what();
    row.metrics.fill(nan);
  }
  return row;
}

inline CellSummary summarize_cell(const std::vector<ReplicateRow>& rows) {
  CellSummary c;
  c.n = rows.front().n;
  c.q_rule = rows.front().q_rule;
  c.q = rows.front().q;
  for (const auto& r : rows) c.failures += r.failed ? 1 : 0;
  for (std::size_t m = 0; m < 4; ++m) {
    double sum = 0, sq = 0;
    int k = 0;
    for (const auto& r : rows)
      if (!r.failed && !std::isnan(r.metrics[m])) {
        sum += r.metrics[m];
        ++k;
      }
    auto& s = c.metrics[m];
    s.reps = k;
    if (k == 0) {
      s.mean = s.stderr_ = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    s.mean = sum / k;
    for (const auto& r : rows)
      if (!r.failed && !std::isnan(r.metrics[m])) sq += (r.metrics[m] - s.mean) * (r.metrics[m] - s.mean);
    s.stderr_ = k > 1 ? std::sqrt(sq / (k - 1) / k) : 0.0;
  }
  return c;
}

/// Runs every (n, q rule, replicate). Replicates are independent given
/// their derived seed, so the thread count does not change the output.
inline GridResult run_grid(const ExperimentGrid& g) {
  g.validate();
  struct Task {
    Index n;
    QRule q;
    int rep;
  };
  std::vector<Task> tasks;
  for (Index n : g.ns)
    for (const auto& q : g.qs)
      for (int r = 0; r < g.reps; ++r) tasks.push_back({n, q, r});

  std::vector<ReplicateRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks.size();)
      rows[t] = run_replicate(g, tasks[t].n, tasks[t].q, tasks[t].rep);
  };
  const int threads = std::max(1, g.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  GridResult res;
  res.model = to_string(g.model);
  res.seed = g.seed;
  for (std::size_t start = 0; start < rows.size(); start += static_cast<std::size_t>(g.reps)) {
    std::vector<ReplicateRow> cell(rows.begin() + start, rows.begin() + start + g.reps);
    res.cells.push_back(summarize_cell(cell));
  }
  res.rows = std::move(rows);
  return res;
}

/// Looks up a cell by n and rule name.
inline const CellSummary& find_cell(const GridResult& r, Index n, const std::string& q_rule) {
  for (const auto& c : r.cells)
    if (c.n == n && c.q_rule == q_rule) return c;
  throw IndexError("no cell n=" + std::to_string(n) + " q=" + q_rule);
}

// ---------------------------------------------------------------------------
// Emission

inline std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void emit_csv(const GridResult& r, std::ostream& out) {
  out << "model,n,q_rule,q_value,metric,mean,stderr,reps,failures\n";
  for (const auto& c : r.cells)
    for (std::size_t m = 0; m < 4; ++m)
      out << r.model << ',' << c.n << ',' << c.q_rule << ',' << format_number(c.q) << ',' << metric_names()[m] << ','
          << format_number(c.metrics[m].mean) << ',' << format_number(c.metrics[m].stderr_) << ','
          << c.metrics[m].reps << ',' << c.failures << '\n';
}

inline ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

inline ordered_json to_json(const GridResult& r) {
  ordered_json j;
  j["model"] = r.model;
  j["seed"] = r.seed;
  j["cells"] = ordered_json::array();
  for (const auto& c : r.cells) {
    ordered_json cj;
    cj["n"] = c.n;
    cj["q_rule"] = c.q_rule;
    cj["q_value"] = c.q;
    cj["failures"] = c.failures;
    for (std::size_t m = 0; m < 4; ++m)
      cj["metrics"][metric_names()[m]] = {{"mean", number_or_null(c.metrics[m].mean)},
                                          {"stderr", number_or_null(c.metrics[m].stderr_)},
                                          {"reps", c.metrics[m].reps}};
    j["cells"].push_back(std::move(cj));
  }
  j["replicates"] = ordered_json::array();
  for (const auto& row : r.rows) {
    ordered_json rj;
    rj["n"] = row.n;
    rj["q_rule"] = row.q_rule;
    rj["q_value"] = row.q;
    rj["rep"] = row.rep;
    rj["seed"] = row.seed;
    rj["failed"] = row.failed;
    if (row.failed) rj["failure"] = row.failure;
    for (std::size_t m = 0; m < 4; ++m) rj[metric_names()[m]] = number_or_null(row.metrics[m]);
    j["replicates"].push_back(std::move(rj));
  }
  return j;
}

inline void emit_json(const GridResult& r, std::ostream& out) { out << to_json(r).dump(2) << '\n'; }

namespace detail {

template <class Fn>
void write_file(const std::string& path, Fn&& fn) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  fn(f);
  f.flush();
  if (!f) throw IoError("write failed for '" + path + "'");
}

inline ordered_json matrix_json(const Matrix& M) {
  ordered_json rows = ordered_json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(number_or_null(M(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

inline void emit_csv(const GridResult& r, const std::string& path) {
  detail::write_file(path, [&](std::ostream& o) { emit_csv(r, o); });
}

inline void emit_json(const GridResult& r, const std::string& path) {
  detail::write_file(path, [&](std::ostream& o) { emit_json(r, o); });
}

/// Undefined block estimates serialize as null.
inline ordered_json to_json(const DetectionResult& d) {
  ordered_json j;
  j["anchor"] = d.anchor;
  j["membership"] = d.membership;
  j["merge_permutation"] = d.merge_permutation;
  j["merge_score"] = number_or_null(d.merge_score);
  j["P_SS_hat"] = detail::matrix_json(d.P_SS_hat);
  j["P_SIS_hat"] = detail::matrix_json(d.P_SIS_hat);
  j["anchor_self_estimate"] = d.anchor_self_estimate;
  return j;
}

// ---------------------------------------------------------------------------
// Theory check

struct TheoryCheckConfig {
  int instances = 50;
  std::uint64_t seed = 1;
  std::vector<Index> Ks{1, 2, 3};
  Index n_min = 100, n_max = 400;
  double q_min = 0.1, q_max = 0.3;
  int max_draws = 20;  ///< redraws per instance until the invertibility flags hold
  bool with_m_set = true;
  DetectOptions detect;
};

struct TheoryTolerances {
  double gap_ratio = 1e6;
  double root_match = 1e-8;
  double residual = 1e-8;
  double orthogonality = 1e-6;
  double root_gap = 1e-6;
  double closed_form = 1e-10;
};

struct TheoryInstanceReport {
  Index K = 0, n = 0;
  double q = 0;
  std::uint64_t seed = 0;
  bool invertible = false;
  Index rank_BE = 0;
  double gap_ratio = 0;
  double h_residual_max = 0;
  double eigen_residual_max = 0;
  double root_match_max = 0;  ///< relative, against the dense spectrum of B_E
  double closed_form_error = std::numeric_limits<double>::quiet_NaN();
  double orthogonality_max = 0;
  bool jittered = false;
  NormReport norms;
  double m_fraction = std::numeric_limits<double>::quiet_NaN();
  std::string error;
  bool pass = false;
};

struct TheoryCheckReport {
  std::vector<TheoryInstanceReport> instances;
  int passed = 0;
  bool pass = false;
};

/// Random full-rank K x K block matrix with entries q * U[2,3] on the
/// diagonal and q * U[0.5,1.5] off it.
inline Matrix random_block_matrix(Index K, double q, Rng& rng) {
  Matrix P(K, K);
  for (Index i = 0; i < K; ++i) {
    P(i, i) = q * (2.0 + rng.uniform());
    for (Index j = i + 1; j < K; ++j) P(i, j) = P(j, i) = q * (0.5 + rng.uniform());
  }
  return P;
}

/// K = 1 roots y = p (s +- sqrt(s^2 + 4 s (n - s))) / 2, ascending.
inline std::array<double, 2> closed_form_roots_k1(double p, double s, double n) {
  const double r = std::sqrt(s * s + 4.0 * s * (n - s));
  return {p * (s - r) / 2.0, p * (s + r) / 2.0};
}

inline TheoryInstanceReport check_theory_instance(const SbmSpec& spec, std::uint64_t seed, double q = 0,
                                                  const TheoryTolerances& tol = {}, bool with_m_set = true,
                                                  const DetectOptions& dopt = {}) {
  TheoryInstanceReport r;
  r.K = spec.K;
  r.n = spec.n();
  r.q = q;
  r.seed = seed;
  try {
    const AdjacencyMatrix A = sample_adjacency(spec, derive_seed({seed, 0}));
    const PartialView view = perceive_based(A, 0);
    const TheoryOracle o = build_theory_oracle(spec, view.neighbor);
    r.invertible = o.invertible();
    const RankReport rank = verify_rank_BE(o);
    r.rank_BE = rank.rank;
    r.gap_ratio = rank.gap_ratio;
    if (!r.invertible) throw NotInvertible("invertibility flags false");

    const QuadraticRoots roots = solve_quadratic_eigenproblem(o);
    r.jittered = roots.jittered;
    r.h_residual_max = roots.h_residuals.maxCoeff();
    r.eigen_residual_max = roots.eigen_residuals.maxCoeff();
    r.orthogonality_max = orthogonality_max(roots, tol.root_gap);

    Eigen::SelfAdjointEigenSolver<Matrix> es(o.BE, Eigen::EigenvaluesOnly);
    const auto order = detail::magnitude_order(es.eigenvalues());
    std::vector<double> dense;
    for (Index k = 0; k < 2 * spec.K; ++k) dense.push_back(es.eigenvalues()(order[k]));
    std::sort(dense.begin(), dense.end());
    std::vector<double> ys(roots.ys.data(), roots.ys.data() + roots.ys.size());
    std::sort(ys.begin(), ys.end());
    for (std::size_t k = 0; k < ys.size(); ++k)
      r.root_match_max = std::max(r.root_match_max, std::abs(ys[k] - dense[k]) / std::abs(dense[k]));

    if (spec.K == 1) {
      const auto cf = closed_form_roots_k1(spec.P(0, 0), o.s.sum(), static_cast<double>(r.n));
      r.closed_form_error = std::max(std::abs(ys[0] - cf[0]) / std::abs(cf[0]), std::abs(ys[1] - cf[1]) / std::abs(cf[1]));
    }

    r.norms = major_term_report(A, view, o);
    if (with_m_set) {
      try {
        const DivideResult d = divide_clusters(view, spec.K, derive_seed({seed, 1}), dopt);
        r.m_fraction = compute_M_set(o, roots, d.embedding, d.centroids).fraction;
      } catch (const GroupTooSmall&) {
      }
    }

    r.pass = r.rank_BE == 2 * spec.K && r.gap_ratio > tol.gap_ratio && r.root_match_max <= tol.root_match &&
             r.eigen_residual_max <= tol.residual && r.h_residual_max <= tol.residual &&
             r.orthogonality_max <= tol.orthogonality &&
             (spec.K != 1 || r.closed_form_error <= tol.closed_form);
  } catch (const Error& e) {
    r.error = e.what();
    r.pass = false;
  }
  return r;
}

/// Draws `instances` random SBMs (K, n, q and P uniform over the configured
/// ranges, balanced blocks, anchor node 0), redrawing the graph until the
/// invertibility flags hold, and checks each one.
inline TheoryCheckReport run_theory_check(const TheoryCheckConfig& cfg, const TheoryTolerances& tol = {}) {
  if (cfg.instances < 1 || cfg.Ks.empty() || cfg.n_min > cfg.n_max || !(cfg.q_min <= cfg.q_max))
    throw InvalidSpec("invalid theory-check configuration");
  TheoryCheckReport rep;
  for (int t = 0; t < cfg.instances; ++t) {
    Rng rng(derive_seed({cfg.seed, static_cast<std::uint64_t>(t)}));
    const Index K = cfg.Ks[rng.below(cfg.Ks.size())];
    const Index n = cfg.n_min + static_cast<Index>(rng.below(static_cast<std::uint64_t>(cfg.n_max - cfg.n_min + 1)));
    const double q = cfg.q_min + (cfg.q_max - cfg.q_min) * rng.uniform();
    const SbmSpec spec = SbmSpec::balanced(random_block_matrix(K, q, rng), n);
    TheoryInstanceReport r;
    for (int draw = 0; draw < cfg.max_draws; ++draw) {
      r = check_theory_instance(spec, derive_seed({cfg.seed, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(draw)}),
                                q, tol, cfg.with_m_set, cfg.detect);
      if (r.invertible) break;
    }
    rep.passed += r.pass ? 1 : 0;
    rep.instances.push_back(std::move(r));
  }
  rep.pass = rep.passed == static_cast<int>(rep.instances.size());
  return rep;
}

inline ordered_json to_json(const TheoryInstanceReport& r) {
  ordered_json j;
  j["K"] = r.K;
  j["n"] = r.n;
  j["q"] = r.q;
  j["seed"] = r.seed;
  j["invertible"] = r.invertible;
  j["rank_BE"] = r.rank_BE;
  j["gap_ratio"] = number_or_null(r.gap_ratio);
  j["root_residuals"] = {{"null_vector_max", r.h_residual_max},
                         {"eigenpair_max", r.eigen_residual_max},
                         {"dense_match_max", r.root_match_max},
                         {"closed_form_k1", number_or_null(r.closed_form_error)}};
  j["orthogonality_max"] = r.orthogonality_max;
  j["norm_ratios"] = {{"diff_over_sigma_2K", number_or_null(r.norms.diff_over_sigma)},
                      {"diff_over_BE", number_or_null(r.norms.diff_over_be)},
                      {"proxy_over_BE", number_or_null(r.norms.proxy_over_be)}};
  j["m_fraction"] = number_or_null(r.m_fraction);
  j["jittered"] = r.jittered;
  if (!r.error.empty()) j["error"] = r.error;
  j["pass"] = r.pass;
  return j;
}

inline ordered_json to_json(const TheoryCheckReport& r) {
  ordered_json j;
  j["instances"] = ordered_json::array();
  for (const auto& i : r.instances) j["instances"].push_back(to_json(i));
  j["passed"] = r.passed;
  j["total"] = r.instances.size();
  j["pass"] = r.pass;
  return j;
}

// ---------------------------------------------------------------------------
// Karate club

struct KarateRow {
  std::string anchor;
  std::string scenario;  ///< "original" or "deleted"
  Ratio observed_edge_ratio;
  Index nodes_within_depth = 0;
  Index wrong = 0;
  std::vector<Index> membership;
  std::string error;
};

struct KarateOptions {
  Index K = 2;
  std::uint64_t seed = 1;
  DetectOptions detect;
};

inline KarateRow karate_row(const AdjacencyMatrix& g, const std::string& anchor, const std::string& scenario,
                            const KarateOptions& opt) {
  KarateRow row;
  row.anchor = anchor;
  row.scenario = scenario;
  const Index a = data::karate_node(anchor);
  const PartialView view = perceive_based(g, a);
  const ViewStats st = view_stats(g, view);
  row.observed_edge_ratio = st.observed_edge_ratio;
  row.nodes_within_depth = st.within_depth_fraction.num;
  try {
    const auto det = detect_communities(view, opt.K, derive_seed({opt.seed, static_cast<std::uint64_t>(a)}), opt.detect);
    row.membership = det.membership;
    row.wrong = misclustering_rate(det.membership, data::karate_truth(), opt.K).num;
  } catch (const GroupTooSmall& e) {
    row.error = e.what();
  }
  return row;
}

/// Each anchor on the full club, then again after removing `deletions`.
inline std::vector<KarateRow> run_karate(const std::vector<std::string>& anchors,
                                         const std::vector<std::pair<std::string, std::string>>& deletions = {},
                                         const KarateOptions& opt = {}) {
  for (const auto& a : anchors) data::karate_node(a);
  const AdjacencyMatrix g = data::karate_graph();
  std::vector<KarateRow> rows;
  for (const auto& a : anchors) rows.push_back(karate_row(g, a, "original", opt));
  if (!deletions.empty()) {
    AdjacencyMatrix h = g;
    for (const auto& [u, v] : deletions) h = delete_edge(h, data::karate_node(u), data::karate_node(v));
    for (const auto& a : anchors) rows.push_back(karate_row(h, a, "deleted", opt));
  }
  return rows;
}

inline ordered_json to_json(const std::vector<KarateRow>& rows) {
  ordered_json j = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json rj;
    rj["anchor"] = r.anchor;
    rj["scenario"] = r.scenario;
    rj["observed_edge_ratio"] = r.observed_edge_ratio.value();
    rj["nodes_within_depth"] = r.nodes_within_depth;
    rj["wrong"] = r.wrong;
    rj["membership"] = r.membership;
    if (!r.error.empty()) rj["error"] = r.error;
    j.push_back(std::move(rj));
  }
  return j;
}

inline void emit_karate_csv(const std::vector<KarateRow>& rows, std::ostream& out) {
  out << "anchor,scenario,observed_edge_ratio,nodes_within_depth,wrong\n";
  for (const auto& r : rows)
    out << r.anchor << ',' << r.scenario << ',' << format_number(r.observed_edge_ratio.value()) << ','
        << r.nodes_within_depth << ',' << (r.error.empty() ? std::to_string(r.wrong) : "NA") << '\n';
}

// ---------------------------------------------------------------------------
// Political blogs (or any labelled edge list)

struct PolblogsRow {
  std::string anchor;
  Index nodes_observed = 0;
  Ratio within_subnet_edge_ratio;
  Ratio misclustering;
  bool degenerate = false;
  std::string note;
};

struct PolblogsReport {
  Index lcc_nodes = 0;
  Index lcc_edges = 0;
  std::vector<PolblogsRow> rows;
  std::map<Index, Index> degree_histogram_lcc;
  std::map<Index, Index> degree_histogram_view;  ///< first anchor's within-depth view
};

struct PolblogsOptions {
  Index K = 2;
  std::uint64_t seed = 1;
  EdgeListOptions edges;
  DetectOptions detect;
};

inline PolblogsReport run_polblogs(const AdjacencyMatrix& full, const std::map<std::string, std::string>& labels,
                                   const std::vector<std::string>& anchors, const PolblogsOptions& opt = {}) {
  const Subgraph lcc = largest_connected_component(full);
  const AdjacencyMatrix& g = lcc.graph;
  const std::vector<Index> truth = align_membership(g, labels);

  std::vector<Index> anchor_nodes;
  for (const auto& id : anchors) {
    Index found = -1;
    for (Index i = 0; i < full.n() && found < 0; ++i)
      if (full.label(i) == id) found = i;
    if (found < 0) throw UnknownAnchor("unknown node id '" + id + "'");
    if (lcc.old_to_new[found] < 0) throw AnchorOutsideLCC("node '" + id + "' is outside the largest component");
    anchor_nodes.push_back(lcc.old_to_new[found]);
  }

  PolblogsReport rep;
  rep.lcc_nodes = g.n();
  rep.lcc_edges = g.edge_count();
  rep.degree_histogram_lcc = degree_histogram(g);
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    const Index a = anchor_nodes[k];
    PolblogsRow row;
    row.anchor = anchors[k];
    const PartialView view = perceive_based(g, a);
    const ViewStats st = view_stats(g, view);
    const Subgraph within = perceive_within(view);
    row.nodes_observed = st.within_depth_fraction.num;
    row.within_subnet_edge_ratio = st.within_subnet_edge_ratio;
    if (k == 0) rep.degree_histogram_view = degree_histogram(within.graph);

    const PartialView reduced = perceive_based(within.graph, within.old_to_new[a]);
    try {
      const auto det = detect_communities(reduced, opt.K, derive_seed({opt.seed, static_cast<std::uint64_t>(a)}),
                                          opt.detect);
      std::vector<Index> est, tru;
      for (Index i = 0; i < within.graph.n(); ++i) {
        const Index t = truth[within.new_to_old[i]];
        if (t < 0 || t >= opt.K) continue;
        est.push_back(det.membership[i]);
        tru.push_back(t);
      }
      row.misclustering = misclustering_rate(est, tru, opt.K);
    } catch (const GroupTooSmall& e) {
      row.degenerate = true;
      row.note = e.what();
      row.misclustering = {0, 0};
    }
    if (row.nodes_observed <= 1) row.degenerate = true;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

inline PolblogsReport run_polblogs(const std::string& edge_list_path, const std::string& labels_path,
                                   const std::vector<std::string>& anchors, const PolblogsOptions& opt = {}) {
  return run_polblogs(load_edge_list(edge_list_path, opt.edges), load_membership_csv(labels_path), anchors, opt);
}

inline ordered_json to_json(const PolblogsReport& r) {
  auto hist = [](const std::map<Index, Index>& h) {
    ordered_json a = ordered_json::array();
    for (auto [deg, count] : h) a.push_back({{"degree", deg}, {"count", count}});
    return a;
  };
  ordered_json j;
  j["lcc_nodes"] = r.lcc_nodes;
  j["lcc_edges"] = r.lcc_edges;
  j["anchors"] = ordered_json::array();
  for (const auto& row : r.rows) {
    ordered_json rj;
    rj["anchor"] = row.anchor;
    rj["nodes_observed"] = row.nodes_observed;
    rj["within_subnet_edge_ratio"] = row.within_subnet_edge_ratio.value();
    rj["misclustering"] = row.degenerate ? ordered_json(nullptr) : ordered_json(row.misclustering.value());
    rj["degenerate"] = row.degenerate;
    if (!row.note.empty()) rj["note"] = row.note;
    j["anchors"].push_back(std::move(rj));
  }
  j["degree_histogram_lcc"] = hist(r.degree_histogram_lcc);
  j["degree_histogram_view"] = hist(r.degree_histogram_view);
  return j;
}

inline void emit_polblogs_csv(const PolblogsReport& r, std::ostream& out) {
  out << "anchor,nodes_observed,within_subnet_edge_ratio,misclustering,degenerate\n";
  for (const auto& row : r.rows)
    out << row.anchor << ',' << row.nodes_observed << ',' << format_number(row.within_subnet_edge_ratio.value())
        << ',' << (row.degenerate ? "NA" : format_number(row.misclustering.value())) << ','
        << (row.degenerate ? 1 : 0) << '\n';
}

}  // namespace pinet
