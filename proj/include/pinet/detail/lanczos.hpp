#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "pinet/random.hpp"

namespace pinet::detail {

struct EigenPairs {
  Eigen::VectorXd values;   // descending |value|
  Eigen::MatrixXd vectors;  // matching columns
};

/// Indices sorting `values` by descending magnitude; equal magnitudes put the
/// positive value first.
inline std::vector<Eigen::Index> magnitude_order(const Eigen::VectorXd& values) {
  std::vector<Eigen::Index> idx(values.size());
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(values(a)), mb = std::abs(values(b));
    if (ma != mb) return ma > mb;
    return values(a) > values(b);
  });
  return idx;
}

inline Eigen::VectorXd pseudo_random_unit(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 2.0 * rng.uniform() - 1.0;
  return v / v.norm();
}

/// Lanczos with full (twice-applied) reorthogonalization for the `m`
/// eigenpairs of largest magnitude of a symmetric operator. `apply(x, y)`
/// must write y = M x. Returns nullopt when the Ritz estimates do not reach
/// `tol * |theta_max|` within `max_dim` steps; the caller falls back to a
/// dense solver.
template <class Apply>
std::optional<EigenPairs> lanczos_largest_magnitude(Apply&& apply, Eigen::Index n, Eigen::Index m, double tol,
                                                    Eigen::Index max_dim, std::uint64_t seed = 0x5eed) {
  using Eigen::Index;
  max_dim = std::min(max_dim, n);
  Eigen::MatrixXd Q(n, std::min<Index>(max_dim, 2 * m + 40));
  std::vector<double> alpha, beta;  // beta[j] couples q_j and q_{j+1}
  Q.col(0) = pseudo_random_unit(n, seed);
  Eigen::VectorXd w(n);
  const Index min_dim = std::min<Index>(n, 2 * m + 20);
  std::uint64_t restarts = 0;

  auto ritz = [&](Index k, Eigen::VectorXd& theta, Eigen::MatrixXd& S) {
    Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), k);
    Eigen::VectorXd e(std::max<Index>(k - 1, 1));
    for (Index i = 0; i + 1 < k; ++i) e(i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e.head(std::max<Index>(k - 1, 0)), Eigen::ComputeEigenvectors);
    theta = es.eigenvalues();
    S = es.eigenvectors();
  };

  for (Index j = 0; j < max_dim; ++j) {
    apply(Q.col(j), w);
    alpha.push_back(Q.col(j).dot(w));
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd h = Q.leftCols(j + 1).transpose() * w;
      w.noalias() -= Q.leftCols(j + 1) * h;
    }
    const double b = w.norm();
    const Index k = j + 1;

    double scale = 0.0;
    for (double x : alpha) scale = std::max(scale, std::abs(x));
    for (double x : beta) scale = std::max(scale, std::abs(x));
    const bool breakdown = b <= 1e-13 * std::max(scale, 1e-300);
    const bool exhausted = k == max_dim;

    if (exhausted || (k >= min_dim && (breakdown || (k - min_dim) % 5 == 0))) {
      Eigen::VectorXd theta;
      Eigen::MatrixXd S;
      ritz(k, theta, S);
      const auto order = magnitude_order(theta);
      const double tmax = std::max(std::abs(theta(order[0])), 1e-300);
      bool converged = k >= m;
      for (Index i = 0; i < std::min(m, k) && converged; ++i)
        converged = std::abs((breakdown ? 0.0 : b) * S(k - 1, order[i])) <= tol * tmax;
      if (converged) {
        EigenPairs out;
        out.values.resize(m);
        out.vectors.resize(n, m);
        for (Index i = 0; i < m; ++i) {
          out.values(i) = theta(order[i]);
          out.vectors.col(i) = (Q.leftCols(k) * S.col(order[i])).normalized();
        }
        return out;
      }
    }
    if (exhausted) return std::nullopt;

    if (Q.cols() < k + 1) Q.conservativeResize(Eigen::NoChange, std::min<Index>(max_dim, 2 * Q.cols()));
    if (breakdown) {
      // Invariant subspace reached; continue from a fresh orthogonal direction
      // so that repeated eigenvalues are still found.
      Eigen::VectorXd r = pseudo_random_unit(n, mix64(seed + (++restarts)));
      for (int pass = 0; pass < 2; ++pass) r -= Q.leftCols(k) * (Q.leftCols(k).transpose() * r);
      const double rn = r.norm();
      if (rn <= 1e-10) return std::nullopt;
      beta.push_back(0.0);
      Q.col(k) = r / rn;
    } else {
      beta.push_back(b);
      Q.col(k) = w / b;
    }
  }
  return std::nullopt;
}

}  // namespace pinet::detail
