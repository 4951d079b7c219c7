#pragma once

// Two-stage community detection on a perceived network: divide the nodes by
// adjacency to the anchor and cluster each group on the top-2K eigenvectors
// of B, then merge the 2K clusters into K communities by matching estimated
// block probabilities. Also the full-information spectral baseline and the
// misclustering metric.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "pinet/errors.hpp"
#include "pinet/netcore.hpp"
#include "pinet/perception.hpp"
#include "pinet/random.hpp"
#include "pinet/spectra.hpp"

namespace pinet {

// ---------------------------------------------------------------------------
// k-means

struct KMeansOptions {
  int restarts = 50;
  int max_iter = 300;
  double tol = 1e-9;  ///< stop once no centroid moves farther than this
  bool keep_trace = false;
};

struct KMeansResult {
  std::vector<Index> labels;  ///< in [0, K), numbered by first appearance
  Matrix centroids;           ///< K x d
  double objective = 0;
  int iterations = 0;
  int restarts_used = 0;
  std::vector<double> objective_trace;  ///< per Lloyd iteration of the winning restart
};

namespace detail {

inline double squared_distance(const Matrix& X, Index i, const Matrix& C, Index k) {
  return (X.row(i) - C.row(k)).squaredNorm();
}

inline double kmeans_objective(const Matrix& X, const std::vector<Index>& labels, const Matrix& C) {
  double s = 0;
  for (Index i = 0; i < X.rows(); ++i) s += squared_distance(X, i, C, labels[i]);
  return s;
}

inline Matrix seed_plus_plus(const Matrix& X, Index K, Rng& rng) {
  const Index m = X.rows();
  Matrix C(K, X.cols());
  C.row(0) = X.row(static_cast<Index>(rng.below(m)));
  std::vector<double> d2(m, std::numeric_limits<double>::infinity());
  for (Index k = 1; k < K; ++k) {
    double total = 0;
    for (Index i = 0; i < m; ++i) {
      d2[i] = std::min(d2[i], squared_distance(X, i, C, k - 1));
      total += d2[i];
    }
    Index pick = m - 1;
    if (total > 0) {
      double u = rng.uniform() * total;
      for (Index i = 0; i < m; ++i) {
        u -= d2[i];
        if (u < 0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rng.below(m));
    }
    C.row(k) = X.row(pick);
  }
  return C;
}

inline void recompute_centroids(const Matrix& X, const std::vector<Index>& labels, Matrix& C,
                                std::vector<Index>& counts) {
  C.setZero();
  std::fill(counts.begin(), counts.end(), 0);
  for (Index i = 0; i < X.rows(); ++i) {
    C.row(labels[i]) += X.row(i);
    ++counts[labels[i]];
  }
  for (Index k = 0; k < C.rows(); ++k)
    if (counts[k] > 0) C.row(k) /= static_cast<double>(counts[k]);
}

// Moves the point farthest from its centroid (taken from a cluster with at
// least two members) into each empty cluster.
inline void repair_empty(const Matrix& X, std::vector<Index>& labels, Matrix& C, std::vector<Index>& counts) {
  for (Index k = 0; k < C.rows(); ++k) {
    if (counts[k] > 0) continue;
    Index far = -1;
    double best = -1;
    for (Index i = 0; i < X.rows(); ++i) {
      if (counts[labels[i]] < 2) continue;
      const double d = squared_distance(X, i, C, labels[i]);
      if (d > best) {
        best = d;
        far = i;
      }
    }
    const Index from = labels[far];
    labels[far] = k;
    --counts[from];
    counts[k] = 1;
    recompute_centroids(X, labels, C, counts);
  }
}

struct LloydRun {
  std::vector<Index> labels;
  Matrix C;
  double objective;
  int iterations;
  std::vector<double> trace;
};

inline LloydRun lloyd(const Matrix& X, Matrix C, const KMeansOptions& opt) {
  const Index m = X.rows(), K = C.rows();
  LloydRun r;
  r.labels.assign(m, 0);
  std::vector<Index> counts(K, 0);
  r.iterations = 0;
  for (int it = 0; it < opt.max_iter; ++it) {
    ++r.iterations;
    for (Index i = 0; i < m; ++i) {
      Index arg = 0;
      double best = squared_distance(X, i, C, 0);
      for (Index k = 1; k < K; ++k) {
        const double d = squared_distance(X, i, C, k);
        if (d < best) {
          best = d;
          arg = k;
        }
      }
      r.labels[i] = arg;
    }
    const Matrix old = C;
    recompute_centroids(X, r.labels, C, counts);
    repair_empty(X, r.labels, C, counts);
    r.trace.push_back(kmeans_objective(X, r.labels, C));
    double moved = 0;
    for (Index k = 0; k < K; ++k) moved = std::max(moved, (C.row(k) - old.row(k)).norm());
    if (moved <= opt.tol) break;
  }
  r.C = std::move(C);
  r.objective = kmeans_objective(X, r.labels, r.C);
  return r;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding; keeps the best of `restarts`
/// runs (first run wins ties). Deterministic given `seed`.
inline KMeansResult kmeans(const Matrix& X, Index K, std::uint64_t seed, const KMeansOptions& opt = {}) {
  if (K < 1) throw InvalidSpec("k-means needs K >= 1");
  if (X.rows() < K) throw TooFewPoints(std::to_string(X.rows()) + " points for " + std::to_string(K) + " clusters");
  if (opt.restarts < 1 || opt.max_iter < 1) throw InvalidSpec("k-means needs restarts >= 1 and max_iter >= 1");

  detail::LloydRun best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int r = 0; r < opt.restarts; ++r) {
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(r)}));
    auto run = detail::lloyd(X, detail::seed_plus_plus(X, K, rng), opt);
    if (run.objective < best.objective) best = std::move(run);
  }

  // Renumber clusters by first appearance.
  std::vector<Index> remap(K, -1);
  Index next = 0;
  for (Index l : best.labels)
    if (remap[l] < 0) remap[l] = next++;
  KMeansResult out;
  out.labels.resize(best.labels.size());
  for (std::size_t i = 0; i < best.labels.size(); ++i) out.labels[i] = remap[best.labels[i]];
  out.centroids.resize(K, X.cols());
  for (Index k = 0; k < K; ++k) out.centroids.row(remap[k]) = best.C.row(k);
  out.objective = best.objective;
  out.iterations = best.iterations;
  out.restarts_used = opt.restarts;
  if (opt.keep_trace) out.objective_trace = std::move(best.trace);
  return out;
}

// ---------------------------------------------------------------------------
// Divide

struct DetectOptions {
  KMeansOptions kmeans;
  EigenOptions eigen;
};

/// The 2K clusters of the divide step. Node i lies in group `group_of[i]`
/// (1 adjacent to the anchor, 0 not) and in cluster `cluster[i]` of that group.
struct DivideResult {
  SpectralEmbedding embedding;
  std::vector<std::uint8_t> group_of;
  std::vector<Index> cluster;
  Matrix centroids;  ///< n x 2K, row i = centroid of node i's cluster
  std::vector<Index> adjacent_nodes;
  std::vector<Index> non_adjacent_nodes;
  KMeansResult adjacent_fit;
  KMeansResult non_adjacent_fit;
};

inline SpectralEmbedding perceived_embedding(const PartialView& view, Index m, const EigenOptions& eopt = {}) {
  if (view.n() > eopt.dense_threshold) return eigendecompose_symmetric(view.B.to_sparse(), m, eopt);
  return eigendecompose_symmetric(view.B.to_dense(), m, eopt);
}

/// Splits nodes by their S entry (the anchor included, by its own diagonal
/// entry) and runs k-means with K clusters on each group's rows of the
/// top-2K eigenvectors of B.
inline DivideResult divide_clusters(const PartialView& view, Index K, std::uint64_t seed,
                                    const DetectOptions& opt = {}) {
  if (K < 1) throw InvalidSpec("K must be >= 1");
  const Index n = view.n();
  DivideResult d;
  d.group_of = view.neighbor;
  for (Index i = 0; i < n; ++i) (view.neighbor[i] ? d.adjacent_nodes : d.non_adjacent_nodes).push_back(i);
  if (static_cast<Index>(d.adjacent_nodes.size()) < K)
    throw GroupTooSmall(GroupTooSmall::Group::adjacent, static_cast<Index>(d.adjacent_nodes.size()), K);
  if (static_cast<Index>(d.non_adjacent_nodes.size()) < K)
    throw GroupTooSmall(GroupTooSmall::Group::non_adjacent, static_cast<Index>(d.non_adjacent_nodes.size()), K);

  d.embedding = perceived_embedding(view, 2 * K, opt.eigen);
  const Matrix& W = d.embedding.W;
  d.cluster.assign(n, -1);
  d.centroids.resize(n, 2 * K);

  auto fit = [&](const std::vector<Index>& nodes, std::uint64_t s) {
    Matrix X(static_cast<Index>(nodes.size()), W.cols());
    for (std::size_t r = 0; r < nodes.size(); ++r) X.row(static_cast<Index>(r)) = W.row(nodes[r]);
    KMeansResult km = kmeans(X, K, s, opt.kmeans);
    for (std::size_t r = 0; r < nodes.size(); ++r) {
      d.cluster[nodes[r]] = km.labels[r];
      d.centroids.row(nodes[r]) = km.centroids.row(km.labels[r]);
    }
    return km;
  };
  d.adjacent_fit = fit(d.adjacent_nodes, derive_seed({seed, 1}));
  d.non_adjacent_fit = fit(d.non_adjacent_nodes, derive_seed({seed, 0}));
  return d;
}

// ---------------------------------------------------------------------------
// Block probability estimates and merge

/// Mean of b_ij over ordered pairs i != j: `P_SS(k,l)` for i in adjacent
/// cluster k and j in adjacent cluster l, `P_SIS(k,l)` for i in adjacent
/// cluster k and j in non-adjacent cluster l. Empty index sets give NaN.
/// The anchor is left out of both.
struct BlockEstimates {
  Matrix P_SS;
  Matrix P_SIS;
};

inline BlockEstimates estimate_block_probabilities(const PartialView& view, const DivideResult& d, Index K) {
  const Index n = view.n();
  if (static_cast<Index>(d.cluster.size()) != n || static_cast<Index>(d.group_of.size()) != n)
    throw DimensionMismatch("cluster assignment does not match the view");
  Matrix sum_ss = Matrix::Zero(K, K), cnt_ss = Matrix::Zero(K, K);
  Matrix sum_sis = Matrix::Zero(K, K), cnt_sis = Matrix::Zero(K, K);
  for (Index i = 0; i < n; ++i) {
    if (i == view.anchor || !d.group_of[i]) continue;
    const Index k = d.cluster[i];
    for (Index j = 0; j < n; ++j) {
      if (j == i || j == view.anchor) continue;
      const Index l = d.cluster[j];
      const double b = view.B(i, j);
      if (d.group_of[j]) {
        sum_ss(k, l) += b;
        cnt_ss(k, l) += 1;
      } else {
        sum_sis(k, l) += b;
        cnt_sis(k, l) += 1;
      }
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  BlockEstimates e;
  e.P_SS = sum_ss.binaryExpr(cnt_ss, [nan](double s, double c) { return c > 0 ? s / c : nan; });
  e.P_SIS = sum_sis.binaryExpr(cnt_sis, [nan](double s, double c) { return c > 0 ? s / c : nan; });
  return e;
}

struct MergeResult {
  std::vector<Index> f;  ///< adjacent cluster f[i] joins non-adjacent cluster i
  double score = 0;      ///< Frobenius distance over cells defined on both sides
};

/// Exhaustive search for f minimising sum (C(f(i),f(j)) - D(f(i),j))^2.
/// Undefined (NaN) cells on either side are skipped; ties keep the
/// lexicographically smallest permutation.
inline MergeResult merge_permutation(const Matrix& C, const Matrix& D) {
  const Index K = C.rows();
  if (C.cols() != K || D.rows() != K || D.cols() != K) throw DimensionMismatch("merge inputs must both be K x K");
  if (K > 10) throw KTooLarge("exhaustive merge search supports K <= 10, got " + std::to_string(K));
  std::vector<Index> f(K);
  std::iota(f.begin(), f.end(), Index{0});
  MergeResult best;
  double best_sq = std::numeric_limits<double>::infinity();
  do {
    double sq = 0;
    for (Index i = 0; i < K; ++i)
      for (Index j = 0; j < K; ++j) {
        const double c = C(f[i], f[j]), dd = D(f[i], j);
        if (std::isnan(c) || std::isnan(dd)) continue;
        sq += (c - dd) * (c - dd);
      }
    if (sq < best_sq - 1e-12) {
      best_sq = sq;
      best.f = f;
    }
  } while (std::next_permutation(f.begin(), f.end()));
  best.score = std::sqrt(best_sq);
  return best;
}

// ---------------------------------------------------------------------------
// Full pipeline

struct DetectionResult {
  Index anchor = 0;
  std::vector<Index> membership;  ///< community labels in [0, K)
  std::vector<std::uint8_t> group_of;
  std::vector<Index> cluster_within_group;
  Matrix P_SS_hat;
  Matrix P_SIS_hat;
  std::vector<Index> merge_permutation;
  double merge_score = 0;
  Index anchor_self_estimate = 0;
  Vector eigenvalues;  ///< top-2K eigenvalues of B used for the embedding
};

/// Community label implied by a node's group and cluster under merge map f:
/// non-adjacent cluster l is community l, adjacent cluster f(l) joins it.
inline Index merged_label(bool adjacent, Index cluster, const std::vector<Index>& f) {
  if (!adjacent) return cluster;
  for (std::size_t l = 0; l < f.size(); ++l)
    if (f[l] == cluster) return static_cast<Index>(l);
  throw InvariantViolation("cluster id outside merge permutation");
}

inline DetectionResult detect_communities(const PartialView& view, Index K, std::uint64_t seed,
                                          const DetectOptions& opt = {}) {
  const DivideResult d = divide_clusters(view, K, seed, opt);
  const BlockEstimates est = estimate_block_probabilities(view, d, K);
  const MergeResult merge = merge_permutation(est.P_SS, est.P_SIS);

  DetectionResult r;
  r.anchor = view.anchor;
  r.group_of = d.group_of;
  r.cluster_within_group = d.cluster;
  r.P_SS_hat = est.P_SS;
  r.P_SIS_hat = est.P_SIS;
  r.merge_permutation = merge.f;
  r.merge_score = merge.score;
  r.eigenvalues = d.embedding.values;
  r.membership.resize(view.n());
  for (Index i = 0; i < view.n(); ++i) r.membership[i] = merged_label(d.group_of[i] != 0, d.cluster[i], merge.f);
  r.anchor_self_estimate = r.membership[view.anchor];
  return r;
}

/// Baseline with the whole network known: k-means on the top-K eigenvectors
/// of A.
inline std::vector<Index> spectral_cluster_full(const AdjacencyMatrix& A, Index K, std::uint64_t seed,
                                                const DetectOptions& opt = {}) {
  if (K < 1 || A.n() < K) throw TooFewPoints("spectral clustering needs n >= K >= 1");
  const SpectralEmbedding e = A.n() > opt.eigen.dense_threshold
                                  ? eigendecompose_symmetric(A.to_sparse(), K, opt.eigen)
                                  : eigendecompose_symmetric(A.to_dense(), K, opt.eigen);
  return kmeans(e.W, K, seed, opt.kmeans).labels;
}

// ---------------------------------------------------------------------------
// Misclustering

namespace detail {

/// Maximum-weight perfect matching on a square weight matrix (Hungarian
/// algorithm on negated weights). Returns col_of_row.
inline std::vector<Index> max_weight_assignment(const Matrix& weight) {
  const Index K = weight.rows();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(K + 1, 0), v(K + 1, 0), minv(K + 1);
  std::vector<Index> p(K + 1, 0), way(K + 1, 0);
  std::vector<char> used(K + 1);
  for (Index i = 1; i <= K; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Index i0 = p[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= K; ++j) {
        if (used[j]) continue;
        const double cur = -weight(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= K; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<Index> col_of_row(K);
  for (Index j = 1; j <= K; ++j) col_of_row[p[j] - 1] = j - 1;
  return col_of_row;
}

}  // namespace detail

/// Fraction of nodes mislabelled under the best relabelling of `est`.
inline Ratio misclustering_rate(const std::vector<Index>& est, const std::vector<Index>& truth, Index K) {
  if (est.size() != truth.size()) throw DimensionMismatch("label vectors differ in length");
  const Index n = static_cast<Index>(est.size());
  Matrix confusion = Matrix::Zero(K, K);  // rows est, cols truth
  for (Index i = 0; i < n; ++i) {
    if (est[i] < 0 || est[i] >= K || truth[i] < 0 || truth[i] >= K)
      throw LabelOutOfRange("label at position " + std::to_string(i) + " outside [0, " + std::to_string(K) + ")");
    confusion(est[i], truth[i]) += 1;
  }
  double agree = 0;
  if (K <= 8) {
    std::vector<Index> perm(K);
    std::iota(perm.begin(), perm.end(), Index{0});
    do {
      double a = 0;
      for (Index k = 0; k < K; ++k) a += confusion(k, perm[k]);
      agree = std::max(agree, a);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    const auto match = detail::max_weight_assignment(confusion);
    for (Index k = 0; k < K; ++k) agree += confusion(k, match[k]);
  }
  return {n - static_cast<Index>(std::llround(agree)), n};
}

}  // namespace pinet
