#pragma once

// An anchor's perceived network at knowledge depth 1 or 2, and the summary
// statistics of how much of the full network it reveals.

#include <cstdint>
#include <string>
#include <vector>

#include "pinet/errors.hpp"
#include "pinet/netcore.hpp"

namespace pinet {

/// The anchor's view of a graph. `neighbor[i]` is the anchor's adjacency row
/// (the diagonal of S); `B` is the perceived adjacency matrix on all nodes.
struct PartialView {
  Index anchor = 0;
  int depth = 2;
  std::vector<std::uint8_t> neighbor;
  AdjacencyMatrix B;
  Index source_n = 0;

  Index n() const noexcept { return source_n; }
  bool adjacent(Index i) const { return neighbor[i] != 0; }
  Index neighbor_count() const {
    Index s = 0;
    for (auto v : neighbor) s += v;
    return s;
  }
};

namespace detail {

/// -S A S + A S + S A evaluated with integer matrix algebra.
inline BinaryMatrix sandwich_formula(const BinaryMatrix& A, const std::vector<std::uint8_t>& s) {
  const Index n = A.rows();
  Eigen::VectorXi sv(n);
  for (Index i = 0; i < n; ++i) sv(i) = s[i];
  const Eigen::MatrixXi Ai = A.cast<int>();
  const auto S = sv.asDiagonal();
  const Eigen::MatrixXi R = -(S * Ai * S) + Ai * S + S * Ai;
  return R.cast<std::uint8_t>();
}

}  // namespace detail

/// Perceived network *based on* depth L: all nodes, only the edges the anchor
/// knows about. L=2 keeps a_ij when i or j is adjacent to the anchor (or is
/// the anchor); L=1 keeps only the anchor's own edges.
inline PartialView perceive_based(const AdjacencyMatrix& A, Index anchor, int depth = 2) {
  if (depth != 1 && depth != 2) throw DepthUnsupported("knowledge depth " + std::to_string(depth) + " is not supported");
  const Index n = A.n();
  if (anchor < 0 || anchor >= n) throw IndexError("anchor " + std::to_string(anchor) + " out of range");

  PartialView v;
  v.anchor = anchor;
  v.depth = depth;
  v.source_n = n;
  v.neighbor.resize(n);
  for (Index i = 0; i < n; ++i) v.neighbor[i] = A(anchor, i);

  BinaryMatrix B = BinaryMatrix::Zero(n, n);
  if (depth == 2) {
    for (Index j = 0; j < n; ++j) {
      const bool kj = v.neighbor[j] || j == anchor;
      for (Index i = 0; i < n; ++i)
        if (A(i, j) && (kj || v.neighbor[i] || i == anchor)) B(i, j) = 1;
    }
    if (detail::sandwich_formula(A.entries(), v.neighbor) != B)
      throw InvariantViolation("perceived matrix disagrees with -SAS+AS+SA");
  } else {
    B.row(anchor) = A.entries().row(anchor);
    B.col(anchor) = A.entries().col(anchor);
  }
  v.B = AdjacencyMatrix::from_entries(std::move(B), A.diagonal_mode(), A.labels());
  return v;
}

/// Perceived network *within* depth L: the based-on view with perceived
/// isolated nodes removed. The anchor is always kept.
inline Subgraph perceive_within(const PartialView& view) {
  std::vector<Index> keep;
  const auto& B = view.B;
  for (Index i = 0; i < B.n(); ++i) {
    bool touched = i == view.anchor;
    for (Index j = 0; j < B.n() && !touched; ++j) touched = j != i && B.has_edge(i, j);
    if (touched) keep.push_back(i);
  }
  Subgraph sub;
  sub.new_to_old = keep;
  sub.old_to_new.assign(B.n(), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) sub.old_to_new[keep[k]] = static_cast<Index>(k);
  sub.graph = B.induced(keep);
  return sub;
}

/// Exact fraction num/den.
struct Ratio {
  Index num = 0;
  Index den = 1;
  double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }
};

struct ViewStats {
  Ratio observed_edge_ratio;       ///< edges(B) / edges(A)
  Ratio within_depth_fraction;     ///< nodes within depth (anchor included) / n
  Ratio within_subnet_edge_ratio;  ///< edges(B) / edges(A on within-depth nodes)
};

inline ViewStats view_stats(const AdjacencyMatrix& A, const PartialView& view) {
  if (A.n() != view.n()) throw DimensionMismatch("view was not built from this graph");
  const Index eA = A.edge_count();
  if (eA == 0) throw DivisionUndefined("graph has no edges");
  const Index eB = view.B.edge_count();
  const auto within = perceive_within(view);
  const Index eSub = A.induced(within.new_to_old).edge_count();

  ViewStats s;
  s.observed_edge_ratio = {eB, eA};
  s.within_depth_fraction = {static_cast<Index>(within.new_to_old.size()), A.n()};
  // An isolated anchor observes nothing: 0/0 is reported as 0.
  s.within_subnet_edge_ratio = {eB, eSub};
  return s;
}

/// Copy of A with edge (u,v) removed.
inline AdjacencyMatrix delete_edge(const AdjacencyMatrix& A, Index u, Index v) {
  if (u < 0 || v < 0 || u >= A.n() || v >= A.n()) throw IndexError("edge endpoint out of range");
  if (!A.has_edge(u, v)) throw EdgeAbsent("no edge between " + A.label(u) + " and " + A.label(v));
  AdjacencyMatrix out = A;
  out.set_edge(u, v, false);
  return out;
}

/// Copy of A with edge (u,v) added.
inline AdjacencyMatrix add_edge(const AdjacencyMatrix& A, Index u, Index v) {
  AdjacencyMatrix out = A;
  out.set_edge(u, v, true);
  return out;
}

}  // namespace pinet
