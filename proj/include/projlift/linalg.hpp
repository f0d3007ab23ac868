#pragma once

// Dense linear algebra primitives: projective points, orthonormal subspaces,
// exterior powers and the norm gauge N(g) = max(|g|, |g^-1|).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "projlift/errors.hpp"

namespace projlift {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative singular-value cutoff used for span and rank decisions.
inline constexpr double kRankTol = 1e-8;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// A line in R^n, stored as its canonical unit representative: the entry of
/// largest magnitude (lowest index on ties) is strictly positive.
class ProjPoint {
 public:
  ProjPoint() = default;

  const Vector& coords() const { return coords_; }
  Eigen::Index dim() const { return coords_.size(); }
  double operator[](Eigen::Index i) const { return coords_(i); }

  friend ProjPoint proj_normalize(const Vector& v);
  friend bool operator==(const ProjPoint& a, const ProjPoint& b) {
    return a.coords_ == b.coords_;
  }

 private:
  explicit ProjPoint(Vector v) : coords_(std::move(v)) {}
  Vector coords_;
};

/// Normalizes in place and fixes the sign; returns false for zero or
/// non-finite input. Used on hot paths that cannot afford a ProjPoint copy.
/// True when the canonical representative of the line through v is -v.
inline bool needs_sign_flip(const Eigen::Ref<const Vector>& v) {
  Eigen::Index arg = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best) {
      best = a;
      arg = i;
    }
  }
  return v.size() > 0 && v(arg) < 0.0;
}

inline bool canonicalize_inplace(Eigen::Ref<Vector> v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) return false;
  v /= n;
  if (needs_sign_flip(v)) v = -v;
  return true;
}

inline ProjPoint proj_normalize(const Vector& v) {
  if (v.size() == 0) throw InvalidArgument("proj_normalize: empty vector");
  if (!v.allFinite()) throw NumericalError("proj_normalize: non-finite vector");
  Vector c = v;
  if (!canonicalize_inplace(c)) throw InvalidArgument("proj_normalize: zero vector");
  return ProjPoint(std::move(c));
}

/// Sine of the angle between two unit representatives.
inline double sine_between(const Eigen::Ref<const Vector>& p, const Eigen::Ref<const Vector>& q) {
  const double c = p.dot(q);
  // |p - c q| is accurate for nearly parallel lines, unlike sqrt(1 - c^2).
  const double s = (p - c * q).norm();
  return std::clamp(s, 0.0, 1.0);
}

/// Sine of the angle between two lines; a metric on projective space.
inline double proj_distance(const ProjPoint& p, const ProjPoint& q) {
  if (p.dim() != q.dim()) throw InvalidArgument("proj_distance: dimension mismatch");
  return sine_between(p.coords(), q.coords());
}

/// Linear subspace given by an orthonormal basis (columns).
class Subspace {
 public:
  Subspace() = default;

  /// basis must have orthonormal columns (checked to 1e-10).
  explicit Subspace(Matrix basis) : basis_(std::move(basis)), ambient_(basis_.rows()) {
    if (!basis_.allFinite()) throw NumericalError("Subspace: non-finite basis");
    if (basis_.cols() > ambient_) throw InvalidArgument("Subspace: more basis vectors than ambient dimension");
    if (basis_.cols() > 0) {
      const Matrix gram = basis_.transpose() * basis_;
      const double err = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
      if (err > 1e-10) throw InvalidArgument("Subspace: basis is not orthonormal");
    }
  }

  static Subspace zero(Eigen::Index ambient) {
    Subspace s;
    s.basis_ = Matrix(ambient, 0);
    s.ambient_ = ambient;
    return s;
  }
  static Subspace full(Eigen::Index ambient) { return Subspace(Matrix::Identity(ambient, ambient)); }

  /// span(e_i : i in indices), 0-based.
  static Subspace coordinate(Eigen::Index ambient, std::span<const int> indices) {
    Matrix b = Matrix::Zero(ambient, static_cast<Eigen::Index>(indices.size()));
    for (std::size_t j = 0; j < indices.size(); ++j) {
      require(indices[j] >= 0 && indices[j] < ambient, "Subspace::coordinate: index out of range");
      b(indices[j], static_cast<Eigen::Index>(j)) = 1.0;
    }
    return Subspace(std::move(b));
  }

  const Matrix& basis() const { return basis_; }
  Eigen::Index dim() const { return basis_.cols(); }
  Eigen::Index ambient_dim() const { return ambient_; }
  bool is_zero() const { return dim() == 0; }
  bool is_full() const { return dim() == ambient_; }

  Vector project(const Vector& v) const { return basis_ * (basis_.transpose() * v); }
  Vector residual(const Vector& v) const { return v - project(v); }

  /// Sine of the angle between v and the subspace (1 for the zero subspace).
  double sine_to(const Vector& v) const {
    const double n = v.norm();
    if (!(n > 0.0)) throw InvalidArgument("Subspace::sine_to: zero vector");
    return std::clamp(residual(v).norm() / n, 0.0, 1.0);
  }

 private:
  Matrix basis_;
  Eigen::Index ambient_ = 0;
};

/// Orthonormal basis of the column span of m, keeping singular directions
/// above tol * (largest singular value).
inline Subspace column_span(const Matrix& m, double tol = kRankTol) {
  const Eigen::Index n = m.rows();
  if (m.cols() == 0) return Subspace::zero(n);
  if (!m.allFinite()) throw NumericalError("rank_span: non-finite input");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || !(s(0) > 0.0)) return Subspace::zero(n);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > tol * s(0)) ++r;
  Matrix basis = svd.matrixU().leftCols(r);
  // One re-orthonormalization pass keeps the Gram error well below 1e-12.
  Eigen::HouseholderQR<Matrix> qr(basis);
  Matrix q = qr.householderQ() * Matrix::Identity(n, r);
  for (Eigen::Index j = 0; j < r; ++j)
    if (q.col(j).dot(basis.col(j)) < 0.0) q.col(j) = -q.col(j);
  return Subspace(std::move(q));
}

inline Subspace rank_span(std::span<const Vector> vectors, double tol = kRankTol) {
  if (vectors.empty()) throw InvalidArgument("rank_span: empty list");
  const Eigen::Index n = vectors.front().size();
  Matrix m(n, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    if (vectors[j].size() != n) throw InvalidArgument("rank_span: dimension mismatch");
    m.col(static_cast<Eigen::Index>(j)) = vectors[j];
  }
  return column_span(m, tol);
}

/// Sine of the largest principal angle between equal-dimensional subspaces.
inline double principal_angle_distance(const Subspace& s1, const Subspace& s2) {
  if (s1.ambient_dim() != s2.ambient_dim() || s1.dim() != s2.dim())
    throw InvalidArgument("principal_angle_distance: dimension mismatch");
  if (s1.dim() == 0) return 0.0;
  const Matrix r = s1.basis() - s2.basis() * (s2.basis().transpose() * s1.basis());
  return std::clamp(operator_norm(r), 0.0, 1.0);
}

inline Subspace orthogonal_complement(const Subspace& s) {
  const Eigen::Index n = s.ambient_dim();
  if (s.dim() == 0) return Subspace::full(n);
  if (s.dim() == n) return Subspace::zero(n);
  Eigen::HouseholderQR<Matrix> qr(s.basis());
  Matrix q = qr.householderQ();
  return Subspace(q.rightCols(n - s.dim()));
}

inline Subspace subspace_sum(const Subspace& a, const Subspace& b, double tol = kRankTol) {
  if (a.ambient_dim() != b.ambient_dim()) throw InvalidArgument("subspace_sum: dimension mismatch");
  Matrix m(a.ambient_dim(), a.dim() + b.dim());
  m << a.basis(), b.basis();
  return column_span(m, tol);
}

inline Subspace subspace_intersection(const Subspace& a, const Subspace& b, double tol = kRankTol) {
  return orthogonal_complement(subspace_sum(orthogonal_complement(a), orthogonal_complement(b), tol));
}

/// True when every basis vector of inner lies in outer up to sine tol.
inline bool subspace_contains(const Subspace& outer, const Subspace& inner, double tol = 1e-6) {
  if (outer.ambient_dim() != inner.ambient_dim()) return false;
  if (inner.dim() == 0) return true;
  const Matrix r = inner.basis() - outer.basis() * (outer.basis().transpose() * inner.basis());
  return operator_norm(r) <= tol;
}

// ---------------------------------------------------------------------------
// Exterior powers

inline std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// All k-subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> k_subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> c(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) c[static_cast<std::size_t>(i)] = i;
  for (;;) {
    out.push_back(c);
    int i = k - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++c[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

/// Determinant by partial-pivot elimination. A row or column of exact zeros
/// yields exactly 0.
inline double small_determinant(Matrix a) {
  const Eigen::Index n = a.rows();
  double det = 1.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index p = c;
    for (Eigen::Index r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(p, c))) p = r;
    if (a(p, c) == 0.0) return 0.0;
    if (p != c) {
      a.row(p).swap(a.row(c));
      det = -det;
    }
    det *= a(c, c);
    for (Eigen::Index r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      if (f != 0.0) a.row(r).tail(n - c - 1) -= f * a.row(c).tail(n - c - 1);
    }
  }
  return det;
}

/// Matrix of the induced action on the k-th exterior power, in the
/// lexicographic basis e_{i1} ^ ... ^ e_{ik}, i1 < ... < ik.
inline Matrix wedge_power(const Matrix& g, int k) {
  if (g.rows() != g.cols()) throw InvalidArgument("wedge_power: matrix must be square");
  const int d = static_cast<int>(g.rows());
  if (k < 1 || k > d) throw InvalidArgument("wedge_power: k out of range");
  if (k == 1) return g;
  const auto subsets = k_subsets(d, k);
  const auto m = static_cast<Eigen::Index>(subsets.size());
  Matrix out(m, m);
  Matrix minor(k, k);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& rows = subsets[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& cols = subsets[static_cast<std::size_t>(j)];
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) minor(a, b) = g(rows[static_cast<std::size_t>(a)], cols[static_cast<std::size_t>(b)]);
      out(i, j) = small_determinant(minor);
    }
  }
  return out;
}

/// N(g) = max(|g|, |g^-1|) in operator norm; always >= 1.
inline double gauge_n(const Matrix& g) {
  if (g.rows() != g.cols() || g.rows() == 0) throw InvalidArgument("gauge_n: matrix must be square");
  if (!g.allFinite()) throw NumericalError("gauge_n: non-finite matrix");
  Eigen::JacobiSVD<Matrix> svd(g);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (!(smin > 1e-14 * smax)) throw NumericalError("gauge_n: numerically singular matrix");
  return std::max({smax, 1.0 / smin, 1.0});
}

/// Square, finite, and the full-pivot LU has no pivot below 1e-12 times
/// the largest one.
inline bool is_invertible(const Matrix& g) {
  if (g.rows() != g.cols() || !g.allFinite()) return false;
  Eigen::FullPivLU<Matrix> lu(g);
  lu.setThreshold(1e-12);
  return lu.isInvertible();
}

}  // namespace projlift
