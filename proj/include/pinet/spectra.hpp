#pragma once

// Symmetric eigendecomposition, the major term B_E of the perceived matrix,
// and numerical checks of its spectral structure: the quadratic eigenvalue
// problem whose 2K roots are the nonzero eigenvalues of B_E, its rank, and
// the size of B - B_E relative to its spectral gap.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pinet/detail/lanczos.hpp"
#include "pinet/errors.hpp"
#include "pinet/netcore.hpp"
#include "pinet/perception.hpp"

namespace pinet {

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition

/// Top-m eigenpairs of a symmetric matrix by magnitude.
///
/// Columns of `W` are unit eigenvectors, `values` is sorted by descending
/// magnitude (a positive value precedes its negative twin), and every column
/// is signed so that its largest-magnitude entry (lowest index on ties) is
/// positive.
struct SpectralEmbedding {
  Matrix W;
  Vector values;
  Index m = 0;
};

struct EigenOptions {
  Index dense_threshold = 500;  ///< n at or below this uses the dense solver
  double residual_tol = 1e-8;   ///< ||Mw - lw|| <= residual_tol * ||M||
  double lanczos_tol = 1e-11;   ///< Ritz estimate target, relative
  Index lanczos_max_dim = 600;
};

namespace detail {

inline void apply_sign_convention(Matrix& W) {
  for (Index c = 0; c < W.cols(); ++c) {
    Index arg = 0;
    double best = -1.0;
    for (Index r = 0; r < W.rows(); ++r)
      if (std::abs(W(r, c)) > best) {
        best = std::abs(W(r, c));
        arg = r;
      }
    if (W(arg, c) < 0) W.col(c) *= -1.0;
  }
}

template <class Mat>
double max_asymmetry(const Mat& M) {
  if constexpr (std::is_same_v<Mat, SparseMatrix>) {
    SparseMatrix D = SparseMatrix(M.transpose()) - M;
    return D.nonZeros() == 0 ? 0.0 : D.coeffs().cwiseAbs().maxCoeff();
  } else {
    return M.rows() == 0 ? 0.0 : (M - M.transpose()).cwiseAbs().maxCoeff();
  }
}

template <class Mat>
double max_abs(const Mat& M) {
  if constexpr (std::is_same_v<Mat, SparseMatrix>) {
    return M.nonZeros() == 0 ? 0.0 : M.coeffs().cwiseAbs().maxCoeff();
  } else {
    return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
  }
}

inline EigenPairs dense_top(const Matrix& M, Index m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("dense symmetric eigensolver did not converge");
  const auto order = magnitude_order(es.eigenvalues());
  EigenPairs out;
  out.values.resize(m);
  out.vectors.resize(M.rows(), m);
  for (Index i = 0; i < m; ++i) {
    out.values(i) = es.eigenvalues()(order[i]);
    out.vectors.col(i) = es.eigenvectors().col(order[i]);
  }
  return out;
}

template <class Mat>
bool residuals_ok(const Mat& M, const EigenPairs& p, double tol) {
  const double norm = p.values.size() ? std::abs(p.values(0)) : 0.0;
  for (Index i = 0; i < p.values.size(); ++i) {
    const Vector r = M * p.vectors.col(i) - p.values(i) * p.vectors.col(i);
    if (!(r.norm() <= tol * norm)) return false;
  }
  return true;
}

template <class Mat>
SpectralEmbedding eigendecompose_impl(const Mat& M, Index m, const EigenOptions& opt) {
  const Index n = M.rows();
  if (M.cols() != n) throw NotSymmetric("matrix is not square");
  if (m < 1 || m > n) throw DimensionMismatch("requested eigenpair count outside [1, n]");
  if (max_asymmetry(M) > 1e-10 * std::max(1.0, max_abs(M))) throw NotSymmetric("matrix is not symmetric to 1e-10");

  std::optional<EigenPairs> pairs;
  if (n > opt.dense_threshold) {
    auto apply = [&M](const Eigen::Ref<const Vector>& x, Vector& y) { y.noalias() = M * x; };
    pairs = lanczos_largest_magnitude(apply, n, m, opt.lanczos_tol, opt.lanczos_max_dim);
    if (pairs && !residuals_ok(M, *pairs, opt.residual_tol)) pairs.reset();
  }
  if (!pairs) {
    if constexpr (std::is_same_v<Mat, SparseMatrix>) {
      pairs = dense_top(Matrix(M), m);
    } else {
      pairs = dense_top(M, m);
    }
    if (!residuals_ok(M, *pairs, opt.residual_tol))
      throw ConvergenceFailure("eigenpair residual exceeds tolerance");
  }
  SpectralEmbedding e;
  e.m = m;
  e.values = std::move(pairs->values);
  e.W = std::move(pairs->vectors);
  apply_sign_convention(e.W);
  return e;
}

}  // namespace detail

inline SpectralEmbedding eigendecompose_symmetric(const Matrix& M, Index m, const EigenOptions& opt = {}) {
  return detail::eigendecompose_impl(M, m, opt);
}

inline SpectralEmbedding eigendecompose_symmetric(const SparseMatrix& M, Index m, const EigenOptions& opt = {}) {
  return detail::eigendecompose_impl(M, m, opt);
}

/// Spectral norm of a symmetric matrix: the largest |eigenvalue|.
inline double spectral_norm(const Matrix& M, const EigenOptions& opt = {}) {
  if (M.size() == 0 || M.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  return std::abs(eigendecompose_symmetric(M, 1, opt).values(0));
}

/// All singular values of a symmetric matrix, descending (dense solver).
inline Vector symmetric_singular_values(const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("dense symmetric eigensolver did not converge");
  Vector s = es.eigenvalues().cwiseAbs();
  std::sort(s.data(), s.data() + s.size(), std::greater<double>());
  return s;
}

// ---------------------------------------------------------------------------
// Theory oracle for B_E

/// Everything needed to reason about B_E = -S(EA)S + (EA)S + S(EA) for a
/// given SBM and neighbor indicator S.
struct TheoryOracle {
  SbmSpec spec;
  Matrix EA;            ///< expected adjacency, n x n
  Matrix V;             ///< n x K eigenvectors of EA
  Vector d;             ///< K eigenvalues, descending magnitude
  Matrix block_coeffs;  ///< K x K, V = Pi * block_coeffs
  Vector s;             ///< diagonal of S as 0/1 doubles
  Matrix BE;            ///< n x n major term
  Matrix VtSV;          ///< K x K Gram matrix V^T S V
  double vtsv_min_sv = 0;
  double complement_min_sv = 0;  ///< min singular value of I - V^T S V
  bool vtsv_invertible = false;
  bool complement_invertible = false;

  Index K() const noexcept { return spec.K; }
  Index n() const noexcept { return spec.n(); }
  bool invertible() const noexcept { return vtsv_invertible && complement_invertible; }
};

/// Major term for an expected matrix E and indicator s; entrywise
/// E_ij (s_i + s_j - s_i s_j).
inline Matrix major_term(const Matrix& E, const Vector& s) {
  const Index n = E.rows();
  Matrix out(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) out(i, j) = E(i, j) * (s(i) + s(j) - s(i) * s(j));
  return out;
}

inline TheoryOracle build_theory_oracle(const SbmSpec& spec, const std::vector<std::uint8_t>& neighbor) {
  spec.validate();
  const Index n = spec.n(), K = spec.K;
  if (static_cast<Index>(neighbor.size()) != n) throw DimensionMismatch("neighbor indicator length differs from n");

  // EA = Pi N^{-1/2} (N^{1/2} P N^{1/2}) N^{-1/2} Pi^T with N the block sizes.
  const auto sizes = spec.block_sizes();
  Vector root_n(K);
  for (Index k = 0; k < K; ++k) root_n(k) = std::sqrt(static_cast<double>(sizes[k]));
  const Matrix core = root_n.asDiagonal() * spec.P * root_n.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(core);
  const auto order = detail::magnitude_order(es.eigenvalues());
  const double top = std::abs(es.eigenvalues()(order[0]));
  const double bottom = std::abs(es.eigenvalues()(order[K - 1]));
  if (!(top > 0.0) || bottom <= 1e-10 * top)
    throw RankDeficient("expected adjacency has rank below K (sigma_K / sigma_1 = " + std::to_string(bottom / top) + ")");

  TheoryOracle o;
  o.spec = spec;
  o.d.resize(K);
  Matrix U(K, K);
  for (Index k = 0; k < K; ++k) {
    o.d(k) = es.eigenvalues()(order[k]);
    U.col(k) = es.eigenvectors().col(order[k]);
  }
  detail::apply_sign_convention(U);
  o.block_coeffs = root_n.cwiseInverse().asDiagonal() * U;
  o.V.resize(n, K);
  for (Index i = 0; i < n; ++i) o.V.row(i) = o.block_coeffs.row(spec.membership[i]);
  o.EA = expected_adjacency(spec);

  o.s.resize(n);
  Vector counts = Vector::Zero(K);
  for (Index i = 0; i < n; ++i) {
    o.s(i) = neighbor[i] ? 1.0 : 0.0;
    counts(spec.membership[i]) += o.s(i);
  }
  o.VtSV = o.block_coeffs.transpose() * counts.asDiagonal() * o.block_coeffs;
  o.BE = major_term(o.EA, o.s);

  const Matrix I = Matrix::Identity(K, K);
  o.vtsv_min_sv = Eigen::JacobiSVD<Matrix>(o.VtSV).singularValues()(K - 1);
  o.complement_min_sv = Eigen::JacobiSVD<Matrix>(I - o.VtSV).singularValues()(K - 1);
  o.vtsv_invertible = o.vtsv_min_sv > 1e-10;
  o.complement_invertible = o.complement_min_sv > 1e-10;
  return o;
}

// ---------------------------------------------------------------------------
// Quadratic eigenvalue problem

/// The 2K nonzero eigenvalues of B_E and their eigenvectors, built from the
/// K-dimensional problem det(I - x D G - x^2 D (I - G) D G) = 0, G = V^T S V.
/// Column c of every matrix corresponds to xs(c); xs ascending (K negative
/// roots then K positive), ys = 1/xs.
struct QuadraticRoots {
  Vector xs;
  Vector ys;
  Matrix Q1;  ///< K x 2K unit null vectors of H(x_c)
  Matrix Q2;  ///< K x 2K, x_c D G q1_c
  Matrix Q;   ///< n x 2K, normalized S V q1 + (I - S) V q2
  Vector q_norms;          ///< norms of the unnormalized q_c
  Vector h_residuals;      ///< ||H(x_c) q1_c||
  Vector eigen_residuals;  ///< ||B_E q_c - y_c q_c|| / ||q_c||
  bool jittered = false;   ///< a 1e-10 relative jitter on D separated repeated roots
};

struct QuadraticOptions {
  double imag_tol = 1e-8;      ///< relative to max(1, max |y|)
  double null_tol = 1e-9;      ///< singular value cutoff, relative to sigma_max(H)
  double residual_tol = 1e-8;
  double jitter = 1e-10;
};

namespace detail {

struct RootAttempt {
  Vector xs;
  Matrix Q1;
  Vector nullity;
};

inline Matrix quadratic_H(double x, const Matrix& A1, const Matrix& A2) {
  return Matrix::Identity(A1.rows(), A1.cols()) - x * A1 - x * x * A2;
}

inline RootAttempt quadratic_attempt(const Vector& d, const Matrix& G, const QuadraticOptions& opt,
                                     double null_tol) {
  const Index K = G.rows();
  const Matrix I = Matrix::Identity(K, K);
  const Matrix A1 = d.asDiagonal() * G;
  const Matrix A2 = d.asDiagonal() * (I - G) * d.asDiagonal() * G;

  // y^2 I - y A1 - A2 = 0 linearized as eig([[A1, A2], [I, 0]]).
  Matrix C = Matrix::Zero(2 * K, 2 * K);
  C.topLeftCorner(K, K) = A1;
  C.topRightCorner(K, K) = A2;
  C.bottomLeftCorner(K, K) = I;
  Eigen::EigenSolver<Matrix> es(C, false);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("companion eigensolver did not converge");
  const auto ev = es.eigenvalues();
  double ymax = 1.0;
  for (Index i = 0; i < ev.size(); ++i) ymax = std::max(ymax, std::abs(ev(i)));
  RootAttempt r;
  r.xs.resize(2 * K);
  for (Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i).imag()) > opt.imag_tol * ymax)
      throw ComplexRoots("companion root " + std::to_string(ev(i).real()) + (ev(i).imag() < 0 ? "-" : "+") +
                         std::to_string(std::abs(ev(i).imag())) + "i is not real");
    if (ev(i).real() == 0.0) throw ComplexRoots("zero root: V^T S V or I - V^T S V singular");
    r.xs(i) = 1.0 / ev(i).real();
  }
  std::sort(r.xs.data(), r.xs.data() + r.xs.size());

  r.Q1.resize(K, 2 * K);
  r.nullity.resize(2 * K);
  for (Index c = 0; c < 2 * K; ++c) {
    Eigen::JacobiSVD<Matrix> svd(quadratic_H(r.xs(c), A1, A2), Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    Index nullity = 0;
    for (Index k = 0; k < K; ++k) nullity += sv(k) <= null_tol * std::max(sv(0), 1e-300) ? 1 : 0;
    r.nullity(c) = static_cast<double>(std::max<Index>(nullity, 1));
    r.Q1.col(c) = svd.matrixV().col(K - 1);
  }
  apply_sign_convention(r.Q1);
  return r;
}

}  // namespace detail

inline QuadraticRoots solve_quadratic_eigenproblem(const TheoryOracle& o, const QuadraticOptions& opt = {}) {
  if (!o.invertible()) throw NotInvertible("V^T S V and I - V^T S V must both be invertible");
  const Index K = o.K(), n = o.n();
  const Matrix& G = o.VtSV;

  Vector d = o.d;
  bool jittered = false;
  auto attempt = detail::quadratic_attempt(d, G, opt, opt.null_tol);
  if (attempt.nullity.maxCoeff() > 1.0) {
    // Repeated roots: perturb D by distinct relative amounts and re-extract.
    for (Index k = 0; k < K; ++k) d(k) *= 1.0 + opt.jitter * static_cast<double>(k + 1);
    jittered = true;
    // Split roots sit about jitter * |y| apart, below the first null tolerance.
    attempt = detail::quadratic_attempt(d, G, opt, opt.jitter * 1e-3);
    if (attempt.nullity.maxCoeff() > 1.0)
      throw NullspaceAmbiguous("H(x) keeps a null space of dimension > 1 after jitter");
  }

  QuadraticRoots r;
  r.jittered = jittered;
  r.xs = attempt.xs;
  r.ys = r.xs.cwiseInverse();
  r.Q1 = attempt.Q1;
  Index positive = 0;
  for (Index c = 0; c < 2 * K; ++c) positive += r.xs(c) > 0 ? 1 : 0;
  if (positive != K)
    throw InvariantViolation("expected K positive and K negative roots, found " + std::to_string(positive) +
                             " positive");

  const Matrix A1 = d.asDiagonal() * G;
  const Matrix A2 = d.asDiagonal() * (Matrix::Identity(K, K) - G) * d.asDiagonal() * G;
  r.Q2.resize(K, 2 * K);
  r.Q.resize(n, 2 * K);
  r.q_norms.resize(2 * K);
  r.h_residuals.resize(2 * K);
  r.eigen_residuals.resize(2 * K);
  for (Index c = 0; c < 2 * K; ++c) {
    const Vector q1 = r.Q1.col(c);
    r.Q2.col(c) = r.xs(c) * (A1 * q1);
    const Vector a = o.block_coeffs * q1;           // V q1 by community
    const Vector b = o.block_coeffs * r.Q2.col(c);  // V q2 by community
    Vector q(n);
    for (Index i = 0; i < n; ++i) q(i) = o.s(i) > 0.5 ? a(o.spec.membership[i]) : b(o.spec.membership[i]);
    const double qn = q.norm();
    r.q_norms(c) = qn;
    r.Q.col(c) = q / qn;
    r.h_residuals(c) = (detail::quadratic_H(r.xs(c), A1, A2) * q1).norm();
    r.eigen_residuals(c) = (o.BE * r.Q.col(c) - r.ys(c) * r.Q.col(c)).norm();
  }
  if (r.h_residuals.maxCoeff() > opt.residual_tol)
    throw InvariantViolation("null vector residual " + std::to_string(r.h_residuals.maxCoeff()) + " exceeds tolerance");
  if (r.eigen_residuals.maxCoeff() > opt.residual_tol)
    throw InvariantViolation("B_E eigen-residual " + std::to_string(r.eigen_residuals.maxCoeff()) +
                             " exceeds tolerance");
  return r;
}

/// Largest |q_i^T q_j| over pairs whose roots differ by more than
/// `min_gap * max |y|`. Zero when no pair qualifies.
inline double orthogonality_max(const QuadraticRoots& r, double min_gap = 1e-6) {
  const double ymax = r.ys.cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (Index i = 0; i < r.ys.size(); ++i)
    for (Index j = i + 1; j < r.ys.size(); ++j)
      if (std::abs(r.ys(i) - r.ys(j)) > min_gap * ymax)
        worst = std::max(worst, std::abs(r.Q.col(i).dot(r.Q.col(j))));
  return worst;
}

// ---------------------------------------------------------------------------
// Rank and norm diagnostics

struct RankReport {
  Index rank = 0;
  double gap_ratio = 0;  ///< sigma_2K / sigma_2K+1
  Vector singular_values;
};

/// Numerical rank of B_E (cutoff 1e-8 * sigma_1) from its full dense spectrum.
inline RankReport verify_rank_BE(const TheoryOracle& o) {
  RankReport r;
  r.singular_values = symmetric_singular_values(o.BE);
  const auto& s = r.singular_values;
  const double cutoff = 1e-8 * s(0);
  for (Index i = 0; i < s.size(); ++i) r.rank += s(i) > cutoff && s(i) > 0.0 ? 1 : 0;
  const Index k2 = 2 * o.K();
  const double hi = k2 - 1 < s.size() ? s(k2 - 1) : 0.0;
  const double lo = k2 < s.size() ? s(k2) : 0.0;
  if (hi <= 0.0) {
    r.gap_ratio = 0.0;
  } else {
    r.gap_ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  }
  return r;
}

struct NormReport {
  double diff_norm = 0;   ///< ||B - B_E||
  double be_norm = 0;     ///< ||B_E||
  double sigma_2K = 0;    ///< sigma_2K(B_E)
  double proxy_norm = 0;  ///< ||-(ES)(EA)(ES) + (EA)(ES) + (ES)(EA)||
  double diff_over_sigma = 0;
  double diff_over_be = 0;
  double proxy_over_be = 0;
};

/// Compares the observed perceived matrix with its major term, and the major
/// term with the "expected S" proxy.
inline NormReport major_term_report(const AdjacencyMatrix& A, const PartialView& view, const TheoryOracle& o,
                                    const EigenOptions& eopt = {}) {
  const Index n = o.n();
  if (A.n() != n || view.n() != n) throw DimensionMismatch("graph, view and oracle sizes differ");
  NormReport r;
  r.diff_norm = spectral_norm(view.B.to_dense() - o.BE, eopt);

  const Index k2 = std::min<Index>(2 * o.K(), n);
  const auto top = eigendecompose_symmetric(o.BE, k2, eopt);
  r.be_norm = std::abs(top.values(0));
  r.sigma_2K = std::abs(top.values(k2 - 1));

  const Vector es = o.EA.row(view.anchor).transpose();
  r.proxy_norm = spectral_norm(major_term(o.EA, es), eopt);

  r.diff_over_sigma = r.sigma_2K > 0 ? r.diff_norm / r.sigma_2K : std::numeric_limits<double>::infinity();
  r.diff_over_be = r.be_norm > 0 ? r.diff_norm / r.be_norm : std::numeric_limits<double>::infinity();
  r.proxy_over_be = r.be_norm > 0 ? r.proxy_norm / r.be_norm : std::numeric_limits<double>::infinity();
  return r;
}

// ---------------------------------------------------------------------------
// Nodes whose centroid is far from the ideal eigenvector row

struct MSetReport {
  std::vector<Index> members;
  double fraction = 0;
  double threshold = 0;  ///< 1 / sqrt(2 c2 n)
  double c2 = 0;
  Matrix O;  ///< 2K x 2K rotation aligning Q with W
};

/// Empirical c2 = 1 / (n * lambda_min(QQ^T)) with the 2K x 2K matrix
/// [sqrt(p_n) D_blk Q1; D_blk Q2] built from unit-norm eigenvectors.
inline double empirical_c2(const TheoryOracle& o, const QuadraticRoots& r) {
  const Index K = o.K();
  const double pn = o.spec.P.maxCoeff();
  const Matrix inv = r.q_norms.cwiseInverse().asDiagonal();
  Matrix Qs(2 * K, 2 * K);
  Qs.topRows(K) = std::sqrt(pn) * o.block_coeffs * r.Q1 * inv;
  Qs.bottomRows(K) = o.block_coeffs * r.Q2 * inv;
  Eigen::SelfAdjointEigenSolver<Matrix> es(Qs * Qs.transpose(), Eigen::EigenvaluesOnly);
  return 1.0 / (static_cast<double>(o.n()) * es.eigenvalues()(0));
}

inline MSetReport compute_M_set(const TheoryOracle& o, const QuadraticRoots& r, const SpectralEmbedding& W,
                                const Matrix& centroids, std::optional<double> c2 = std::nullopt) {
  const Index n = o.n(), k2 = 2 * o.K();
  if (r.Q.rows() != n || r.Q.cols() != k2 || W.W.rows() != n || W.W.cols() != k2 || centroids.rows() != n ||
      centroids.cols() != k2)
    throw DimensionMismatch("Q, W and centroids must all be n x 2K");
  MSetReport m;
  Eigen::JacobiSVD<Matrix> svd(r.Q.transpose() * W.W, Eigen::ComputeFullU | Eigen::ComputeFullV);
  m.O = svd.matrixU() * svd.matrixV().transpose();
  m.c2 = c2 ? *c2 : empirical_c2(o, r);
  if (!(m.c2 > 0)) throw DimensionMismatch("c2 must be positive");
  m.threshold = 1.0 / std::sqrt(2.0 * m.c2 * static_cast<double>(n));
  const Matrix QO = r.Q * m.O;
  for (Index i = 0; i < n; ++i)
    if ((centroids.row(i) - QO.row(i)).norm() >= m.threshold) m.members.push_back(i);
  m.fraction = static_cast<double>(m.members.size()) / static_cast<double>(n);
  return m;
}

}  // namespace pinet
