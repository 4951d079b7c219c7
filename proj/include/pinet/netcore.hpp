#pragma once

// Graph representation, stochastic block model specification and sampling,
// edge-list ingestion, connected components and simple graph statistics.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pinet/errors.hpp"
#include "pinet/random.hpp"

namespace pinet {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Whether the adjacency diagonal is forced to zero (real networks) or drawn
/// like any other entry (matches the low-rank expected matrix exactly).
enum class DiagonalMode { zero, bernoulli };

inline const char* to_string(DiagonalMode m) { return m == DiagonalMode::zero ? "zero" : "bernoulli"; }

/// Symmetric binary adjacency matrix with optional node labels.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;

  explicit AdjacencyMatrix(Index n, DiagonalMode mode = DiagonalMode::zero)
      : entries_(BinaryMatrix::Zero(n, n)), mode_(mode) {}

  /// Validates symmetry, binarity and the diagonal rule.
  static AdjacencyMatrix from_entries(BinaryMatrix entries, DiagonalMode mode = DiagonalMode::zero,
                                      std::vector<std::string> labels = {}) {
    if (entries.rows() != entries.cols()) throw InvalidGraph("adjacency matrix must be square");
    const Index n = entries.rows();
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < n; ++i) {
        const auto v = entries(i, j);
        if (v > 1) throw InvalidGraph("adjacency entries must be 0 or 1");
        if (v != entries(j, i)) throw InvalidGraph("adjacency matrix must be symmetric");
      }
      if (mode == DiagonalMode::zero && entries(j, j) != 0)
        throw InvalidGraph("self-loop present under zero diagonal mode");
    }
    if (!labels.empty() && static_cast<Index>(labels.size()) != n)
      throw InvalidGraph("label count does not match node count");
    AdjacencyMatrix a;
    a.entries_ = std::move(entries);
    a.mode_ = mode;
    a.labels_ = std::move(labels);
    return a;
  }

  /// Builds from an undirected edge list of 0-based pairs.
  static AdjacencyMatrix from_edges(Index n, const std::vector<std::pair<Index, Index>>& edges,
                                    DiagonalMode mode = DiagonalMode::zero) {
    AdjacencyMatrix a(n, mode);
    for (auto [u, v] : edges) a.set_edge(u, v, true);
    return a;
  }

  Index n() const noexcept { return entries_.rows(); }
  DiagonalMode diagonal_mode() const noexcept { return mode_; }
  const BinaryMatrix& entries() const noexcept { return entries_; }
  std::uint8_t operator()(Index i, Index j) const { return entries_(i, j); }
  bool has_edge(Index i, Index j) const { return entries_(i, j) != 0; }

  void set_edge(Index i, Index j, bool present) {
    check_index(i);
    check_index(j);
    if (i == j && mode_ == DiagonalMode::zero) {
      if (present) throw InvalidGraph("self-loop not allowed under zero diagonal mode");
      return;
    }
    entries_(i, j) = entries_(j, i) = present ? 1 : 0;
  }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  void set_labels(std::vector<std::string> labels) {
    if (!labels.empty() && static_cast<Index>(labels.size()) != n())
      throw InvalidGraph("label count does not match node count");
    labels_ = std::move(labels);
  }
  /// Label of node i, or its 0-based index when unlabeled.
  std::string label(Index i) const { return labels_.empty() ? std::to_string(i) : labels_[i]; }

  /// Number of undirected edges, i < j.
  Index edge_count() const {
    Index e = 0;
    for (Index j = 0; j < n(); ++j)
      for (Index i = 0; i < j; ++i) e += entries_(i, j);
    return e;
  }

  /// Row sum of row i (includes a self-loop in bernoulli mode).
  Index degree(Index i) const { return entries_.col(i).cast<Index>().sum(); }

  Matrix to_dense() const { return entries_.cast<double>(); }

  SparseMatrix to_sparse() const {
    std::vector<Eigen::Triplet<double>> t;
    for (Index j = 0; j < n(); ++j)
      for (Index i = 0; i < n(); ++i)
        if (entries_(i, j)) t.emplace_back(i, j, 1.0);
    SparseMatrix s(n(), n());
    s.setFromTriplets(t.begin(), t.end());
    return s;
  }

  /// Induced subgraph on `nodes` (in the given order). Labels follow.
  AdjacencyMatrix induced(const std::vector<Index>& nodes) const {
    const Index m = static_cast<Index>(nodes.size());
    BinaryMatrix sub(m, m);
    for (Index b = 0; b < m; ++b)
      for (Index a = 0; a < m; ++a) sub(a, b) = entries_(nodes[a], nodes[b]);
    AdjacencyMatrix out;
    out.entries_ = std::move(sub);
    out.mode_ = mode_;
    if (!labels_.empty()) {
      out.labels_.reserve(nodes.size());
      for (auto v : nodes) out.labels_.push_back(labels_[v]);
    }
    return out;
  }

  friend bool operator==(const AdjacencyMatrix& a, const AdjacencyMatrix& b) {
    return a.mode_ == b.mode_ && a.entries_.rows() == b.entries_.rows() && a.entries_ == b.entries_;
  }

 private:
  void check_index(Index i) const {
    if (i < 0 || i >= n()) throw IndexError("node index " + std::to_string(i) + " out of range");
  }

  BinaryMatrix entries_;
  DiagonalMode mode_ = DiagonalMode::zero;
  std::vector<std::string> labels_;
};

/// A graph extracted from a larger one, with index maps in both directions.
struct Subgraph {
  AdjacencyMatrix graph;
  std::vector<Index> new_to_old;
  std::vector<Index> old_to_new;  ///< -1 for nodes not retained
};

// ---------------------------------------------------------------------------
// Stochastic block model

/// K-block SBM: symmetric K x K probability matrix and a 0-based membership.
struct SbmSpec {
  Index K = 0;
  Matrix P;
  std::vector<Index> membership;

  Index n() const noexcept { return static_cast<Index>(membership.size()); }

  void validate() const {
    if (K < 1) throw InvalidSpec("K must be at least 1");
    if (P.rows() != K || P.cols() != K) throw InvalidSpec("P must be K x K");
    for (Index i = 0; i < K; ++i)
      for (Index j = 0; j < K; ++j) {
        if (!(P(i, j) >= 0.0 && P(i, j) <= 1.0)) throw InvalidSpec("P entries must lie in [0,1]");
        if (P(i, j) != P(j, i)) throw InvalidSpec("P must be symmetric");
      }
    std::vector<Index> sizes(K, 0);
    for (auto g : membership) {
      if (g < 0 || g >= K) throw InvalidSpec("membership label outside [0,K)");
      ++sizes[g];
    }
    for (Index k = 0; k < K; ++k)
      if (sizes[k] == 0) throw InvalidSpec("community " + std::to_string(k) + " is empty");
  }

  std::vector<Index> block_sizes() const {
    std::vector<Index> sizes(K, 0);
    for (auto g : membership) ++sizes[g];
    return sizes;
  }

  /// Contiguous blocks of the given sizes, community 0 first.
  static SbmSpec from_sizes(Matrix P, const std::vector<Index>& sizes) {
    SbmSpec s;
    s.K = P.rows();
    s.P = std::move(P);
    for (Index k = 0; k < static_cast<Index>(sizes.size()); ++k) s.membership.insert(s.membership.end(), sizes[k], k);
    s.validate();
    return s;
  }

  /// n nodes split by floor division, remainder to the last community.
  static SbmSpec balanced(Matrix P, Index n) {
    const Index K = P.rows();
    std::vector<Index> sizes(K, n / K);
    sizes.back() += n % K;
    return from_sizes(std::move(P), sizes);
  }
};

enum class Model { model1, model2, model3 };

inline const char* to_string(Model m) {
  switch (m) {
    case Model::model1: return "model1";
    case Model::model2: return "model2";
    case Model::model3: return "model3";
  }
  return "?";
}

inline Model parse_model(std::string_view s) {
  if (s == "model1" || s == "1") return Model::model1;
  if (s == "model2" || s == "2") return Model::model2;
  if (s == "model3" || s == "3") return Model::model3;
  throw InvalidSpec("unknown model '" + std::string(s) + "'");
}

/// Probability matrix of the simulation models, scaled by q.
inline Matrix model_probabilities(Model m, double q) {
  switch (m) {
    case Model::model1:
      return (Matrix(2, 2) << 3 * q, q, q, 3 * q).finished();
    case Model::model2:
      return (Matrix(3, 3) << 3 * q, 1.5 * q, q, 1.5 * q, 3 * q, 1.5 * q, q, 1.5 * q, 3 * q).finished();
    case Model::model3:
      return (Matrix(3, 3) << 3 * q, q, q, q, 3 * q, q, q, q, 3 * q).finished();
  }
  throw InvalidSpec("unknown model");
}

inline SbmSpec make_model(Model m, Index n, double q) { return SbmSpec::balanced(model_probabilities(m, q), n); }

/// E[A] = Pi P Pi^T, diagonal included.
inline Matrix expected_adjacency(const SbmSpec& spec) {
  spec.validate();
  const Index n = spec.n();
  Matrix M(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) M(i, j) = spec.P(spec.membership[i], spec.membership[j]);
  return M;
}

/// Independent Bernoulli draws for i < j (and i == j in bernoulli mode),
/// visited column-major over the upper triangle.
inline AdjacencyMatrix sample_adjacency(const SbmSpec& spec, std::uint64_t seed,
                                        DiagonalMode mode = DiagonalMode::zero) {
  spec.validate();
  const Index n = spec.n();
  Rng rng(seed);
  BinaryMatrix E = BinaryMatrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    const auto gj = spec.membership[j];
    for (Index i = 0; i < j; ++i) {
      const std::uint8_t v = rng.bernoulli(spec.P(spec.membership[i], gj)) ? 1 : 0;
      E(i, j) = E(j, i) = v;
    }
    if (mode == DiagonalMode::bernoulli) E(j, j) = rng.bernoulli(spec.P(gj, gj)) ? 1 : 0;
  }
  return AdjacencyMatrix::from_entries(std::move(E), mode);
}

// ---------------------------------------------------------------------------
// Edge-list I/O

struct EdgeListOptions {
  int index_base = 1;                   ///< 0 or 1
  bool symmetrize = true;               ///< false keeps only reciprocated pairs
  DiagonalMode diagonal = DiagonalMode::zero;
  std::optional<Index> declared_nodes;  ///< overrides a `# nodes N` header
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool parse_int(std::string_view tok, long long& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && p == tok.data() + tok.size();
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ',')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != ',') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

/// Reads whitespace-separated integer pairs; `#` starts a comment. A comment
/// of the form `# nodes N` declares the node count. Without a declaration the
/// node count is (largest id - base + 1). Nodes are labeled by their file id.
inline AdjacencyMatrix read_edge_list(std::istream& in, const EdgeListOptions& opt = {}) {
  if (opt.index_base != 0 && opt.index_base != 1) throw InvalidGraph("index base must be 0 or 1");
  std::vector<std::pair<long long, long long>> pairs;
  std::optional<long long> declared;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    if (auto h = sv.find('#'); h != std::string_view::npos) {
      auto comment = detail::split_ws(sv.substr(h + 1));
      long long nn = 0;
      if (comment.size() == 2 && comment[0] == "nodes" && detail::parse_int(comment[1], nn)) {
        if (nn < 0) throw ParseError("negative node count", lineno);
        declared = nn;
      }
      sv = sv.substr(0, h);
    }
    sv = detail::trim(sv);
    if (sv.empty()) continue;
    auto toks = detail::split_ws(sv);
    long long u = 0, v = 0;
    if (toks.size() < 2 || !detail::parse_int(toks[0], u) || !detail::parse_int(toks[1], v))
      throw ParseError("expected two integer node ids, got '" + std::string(sv) + "'", lineno);
    if (toks.size() > 3) throw ParseError("too many fields", lineno);
    pairs.emplace_back(u, v);
  }
  if (opt.declared_nodes) declared = *opt.declared_nodes;

  long long max_id = opt.index_base - 1;
  for (auto [u, v] : pairs) max_id = std::max({max_id, u, v});
  const long long n = declared ? *declared : max_id - opt.index_base + 1;
  for (auto [u, v] : pairs)
    for (auto id : {u, v})
      if (id < opt.index_base || id - opt.index_base >= n)
        throw IndexError("node id " + std::to_string(id) + " outside declared range [" +
                         std::to_string(opt.index_base) + ", " + std::to_string(n + opt.index_base - 1) + "]");

  AdjacencyMatrix A(static_cast<Index>(n), opt.diagonal);
  std::set<std::pair<long long, long long>> directed;
  if (!opt.symmetrize)
    for (auto [u, v] : pairs) directed.emplace(u, v);
  for (auto [u, v] : pairs) {
    if (u == v && opt.diagonal == DiagonalMode::zero) continue;
    if (!opt.symmetrize && u != v && !directed.count({v, u})) continue;
    A.set_edge(static_cast<Index>(u - opt.index_base), static_cast<Index>(v - opt.index_base), true);
  }
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) labels.push_back(std::to_string(i + opt.index_base));
  A.set_labels(std::move(labels));
  return A;
}

inline AdjacencyMatrix load_edge_list(const std::string& path, const EdgeListOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list '" + path + "'");
  return read_edge_list(in, opt);
}

/// Canonical serialization: `# nodes N` header then `i j` for i < j ascending
/// (column-major: by j, then i).
inline void write_edge_list(const AdjacencyMatrix& A, std::ostream& out, int index_base = 1) {
  out << "# nodes " << A.n() << '\n';
  for (Index i = 0; i < A.n(); ++i)
    for (Index j = i + 1; j < A.n(); ++j)
      if (A.has_edge(i, j)) out << (i + index_base) << ' ' << (j + index_base) << '\n';
}

inline void save_edge_list(const AdjacencyMatrix& A, const std::string& path, int index_base = 1) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write edge list '" + path + "'");
  write_edge_list(A, out, index_base);
}

/// Membership labels keyed by node id string, from CSV `node_id,community`
/// with a header row.
inline std::map<std::string, std::string> read_membership_csv(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    auto sv = detail::trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    const auto comma = sv.find(',');
    if (comma == std::string_view::npos) throw ParseError("expected 'node_id,community'", lineno);
    auto id = detail::trim(sv.substr(0, comma));
    auto c = detail::trim(sv.substr(comma + 1));
    if (id.empty() || c.empty()) throw ParseError("empty field", lineno);
    out[std::string(id)] = std::string(c);
  }
  return out;
}

inline std::map<std::string, std::string> load_membership_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open membership file '" + path + "'");
  return read_membership_csv(in);
}

inline void write_membership_csv(std::ostream& out, const std::vector<std::string>& ids,
                                 const std::vector<Index>& labels) {
  out << "node_id,community\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << ',' << labels[i] << '\n';
}

/// Aligned 0-based community labels for every node of `g` (by node label).
/// Distinct community values map to [0,K) in sorted order (numeric when all
/// values are integers). Nodes absent from the map get -1.
inline std::vector<Index> align_membership(const AdjacencyMatrix& g,
                                           const std::map<std::string, std::string>& by_id) {
  std::vector<std::string> values;
  for (const auto& [id, c] : by_id) values.push_back(c);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  bool numeric = true;
  for (const auto& v : values) {
    long long x;
    numeric = numeric && detail::parse_int(v, x);
  }
  if (numeric)
    std::sort(values.begin(), values.end(), [](const std::string& a, const std::string& b) {
      return std::stoll(a) < std::stoll(b);
    });
  std::vector<Index> out(g.n(), -1);
  for (Index i = 0; i < g.n(); ++i) {
    auto it = by_id.find(g.label(i));
    if (it == by_id.end()) continue;
    out[i] = std::find(values.begin(), values.end(), it->second) - values.begin();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structure and statistics

/// Connected components as lists of nodes, each sorted ascending, ordered by
/// their smallest node.
inline std::vector<std::vector<Index>> connected_components(const AdjacencyMatrix& g) {
  const Index n = g.n();
  std::vector<char> seen(n, 0);
  std::vector<std::vector<Index>> comps;
  for (Index s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<Index> comp;
    std::queue<Index> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const Index u = q.front();
      q.pop();
      comp.push_back(u);
      for (Index v = 0; v < n; ++v)
        if (!seen[v] && g.has_edge(u, v)) {
          seen[v] = 1;
          q.push(v);
        }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

/// Largest component; ties go to the component with the smallest node id.
inline Subgraph largest_connected_component(const AdjacencyMatrix& g) {
  if (g.n() < 1) throw InvalidGraph("graph has no nodes");
  const auto comps = connected_components(g);
  std::size_t best = 0;
  for (std::size_t c = 1; c < comps.size(); ++c)
    if (comps[c].size() > comps[best].size()) best = c;
  Subgraph sub;
  sub.new_to_old = comps[best];
  sub.old_to_new.assign(g.n(), -1);
  for (std::size_t k = 0; k < sub.new_to_old.size(); ++k) sub.old_to_new[sub.new_to_old[k]] = static_cast<Index>(k);
  sub.graph = g.induced(sub.new_to_old);
  return sub;
}

/// degree -> number of nodes with that degree.
inline std::map<Index, Index> degree_histogram(const AdjacencyMatrix& g) {
  std::map<Index, Index> h;
  for (Index i = 0; i < g.n(); ++i) ++h[g.degree(i)];
  return h;
}

/// Finite-n diagnostics for the SBM regularity conditions. The asymptotic
/// constants have no canonical value, so only ratios are reported.
struct ConditionReport {
  double p_n = 0;                ///< max entry of P
  double min_anchor_row = 0;     ///< min_k P[anchor_community][k]
  double min_block_fraction = 0; ///< smallest community size / n
  double sigma_K_over_pn = 0;    ///< sigma_K(P) / p_n
  bool gap_ok = true;            ///< distinct P values separated by >= gap_fraction * p_n
  std::string notes;
};

inline ConditionReport check_conditions(const SbmSpec& spec, Index anchor_community, double gap_fraction = 0.1) {
  spec.validate();
  if (anchor_community < 0 || anchor_community >= spec.K) throw IndexError("anchor community out of range");
  ConditionReport r;
  r.p_n = spec.P.maxCoeff();
  r.min_anchor_row = spec.P.row(anchor_community).minCoeff();
  const auto sizes = spec.block_sizes();
  r.min_block_fraction = static_cast<double>(*std::min_element(sizes.begin(), sizes.end())) / spec.n();
  Eigen::JacobiSVD<Matrix> svd(spec.P);
  const double sigma_K = svd.singularValues()(spec.K - 1);
  std::ostringstream notes;
  if (r.p_n > 0) {
    r.sigma_K_over_pn = sigma_K / r.p_n;
  } else {
    notes << "P is identically zero; ratios set to 0. ";
  }
  std::vector<double> vals(spec.P.data(), spec.P.data() + spec.P.size());
  std::sort(vals.begin(), vals.end());
  const double eq_tol = 1e-12 * std::max(1.0, r.p_n);
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < vals.size(); ++i) {
    const double d = vals[i] - vals[i - 1];
    if (d > eq_tol) min_gap = std::min(min_gap, d);
  }
  if (std::isfinite(min_gap) && min_gap < gap_fraction * r.p_n) {
    r.gap_ok = false;
    notes << "smallest gap between distinct P values " << min_gap << " < " << gap_fraction << "*p_n. ";
  }
  if (r.p_n >= 1.0) notes << "p_n is not bounded away from 1. ";
  r.notes = notes.str();
  return r;
}

}  // namespace pinet
