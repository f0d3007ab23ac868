#pragma once

// Shipped example ensembles with exponents known by construction. Used by
// the acceptance suite, the tests and the CLI builder registry.

#include <cmath>
#include <string>
#include <vector>

#include "projlift/ensemble.hpp"

namespace projlift::designs {

inline Matrix rotation2(double angle) {
  Matrix r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

inline Matrix diag(std::initializer_list<double> v) {
  Vector d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

/// Scalar affine recursion t -> a t + b with two equally likely maps.
/// Contracting: a in {e^{0.1}, e^{-0.5}}, E log|a| = -0.2.
/// Expanding:   a in {e^{0.5}, e^{-0.1}}, E log|a| = +0.2.
/// The translations +1 / -1 rule out a common fixed point.
inline std::vector<AffineAtom> affine_scalar_atoms(double mean_log_a, double spread = 0.3) {
  const double hi = mean_log_a + spread, lo = mean_log_a - spread;
  return {{0.5, Matrix::Constant(1, 1, std::exp(hi)), Vector::Constant(1, 1.0)},
          {0.5, Matrix::Constant(1, 1, std::exp(lo)), Vector::Constant(1, -1.0)}};
}

inline constexpr double kContractingLogA = -0.2;
inline constexpr double kExpandingLogA = 0.2;

inline std::pair<MatrixEnsemble, BlockSystem> affine_scalar(double mean_log_a) {
  return build_affine_embedding(affine_scalar_atoms(mean_log_a),
                                mean_log_a < 0 ? "affine-contracting" : "affine-expanding");
}

/// {(1/2, [2]), (1/2, [1/2])}: top exponent 0.
inline MatrixEnsemble scalar_pair() {
  return MatrixEnsemble::uniform(1, {Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 0.5)}, "scalar-pair");
}

/// Two independent Gaussian atoms, shifted by the identity to stay well
/// conditioned.
inline MatrixEnsemble random_gl(int dim, int atom_count, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x61));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Matrix> mats;
  while (static_cast<int>(mats.size()) < atom_count) {
    Matrix g(dim, dim);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
    if (is_invertible(g)) mats.push_back(g);
  }
  return MatrixEnsemble::uniform(dim, mats, "random-gl(" + std::to_string(dim) + "," + std::to_string(seed) + ")");
}

inline constexpr std::uint64_t kWedgeSeed = 2024;

/// An SL2(R) pair generating a proximal, strongly irreducible semigroup.
inline std::vector<Matrix> proximal_pair() {
  Matrix h(2, 2), r = rotation2(1.1);
  h << std::exp(0.5), 0.0, 0.0, std::exp(-0.5);
  return {h, Matrix(r * h * r.transpose())};
}

inline MatrixEnsemble proximal2() { return MatrixEnsemble::uniform(2, proximal_pair(), "proximal-2"); }

/// Block-diagonal ensemble on R^4 = W + W', W = span(e1, e2),
/// W' = span(e3, e4). On W the atoms are e^{0.6 +- 0.1} times rotations, so
/// every vector of W grows at rate 0.6 (one FKH level). On W' they are
/// e^{-0.2} times a proximal pair, giving alpha(nu-bar) well below 0.6.
inline MatrixEnsemble complement_block() {
  const auto prox = proximal_pair();
  const double sw[2] = {0.7, 0.5};
  const double ang[2] = {0.9, 2.3};
  std::vector<Matrix> mats;
  for (int i = 0; i < 2; ++i) {
    Matrix g = Matrix::Zero(4, 4);
    g.topLeftCorner(2, 2) = std::exp(sw[i]) * rotation2(ang[i]);
    g.bottomRightCorner(2, 2) = std::exp(-0.2) * prox[static_cast<std::size_t>(i)];
    mats.push_back(g);
  }
  return MatrixEnsemble::uniform(4, mats, "complement-block");
}

inline Subspace complement_block_w_prime() {
  const int idx[2] = {2, 3};
  return Subspace::coordinate(4, idx);
}

/// Mixed example on R^3, W = span(e1, e2), W' = span(e1, e3):
///   g = [[a1, x, y], [0, a2, 0], [0, 0, c]]
/// E log|a1| = -0.3, E log|a2| = 0.5, E log|c| = 0.1, so the FKH levels of W
/// are 0.5 > -0.3 with F_2(W) = span(e1), and alpha = 0.1 lies between.
inline MatrixEnsemble mixed_block() {
  const double a1[2] = {0.0, -0.6}, a2[2] = {0.8, 0.2}, c[2] = {0.3, -0.1};
  const double x[2] = {1.0, -0.5}, y[2] = {1.0, -1.0};
  const double s1[2] = {1.0, -1.0};
  std::vector<Matrix> mats;
  for (int i = 0; i < 2; ++i) {
    Matrix g = Matrix::Zero(3, 3);
    g(0, 0) = s1[i] * std::exp(a1[i]);
    g(0, 1) = x[i];
    g(0, 2) = y[i];
    g(1, 1) = std::exp(a2[i]);
    g(2, 2) = std::exp(c[i]);
    mats.push_back(g);
  }
  return MatrixEnsemble::uniform(3, mats, "mixed-block");
}

inline Subspace mixed_block_w_prime() {
  const int idx[2] = {0, 2};
  return Subspace::coordinate(3, idx);
}

/// Upper block-triangular in R^3 (2 + 1 blocks), conjugated by a fixed
/// rotation Q. The 2x2 block is e^{0.3} times a proximal pair, the 1x1
/// block has E log|c| = -0.2. Then V_{1,mu} = Q span(e1, e2) and
/// F_2(mu^t) = Q span(e3).
inline Matrix transpose_support_rotation() {
  Matrix q(3, 3);
  const double a = 0.4, b = 0.7;
  Matrix rx = Matrix::Identity(3, 3), rz = Matrix::Identity(3, 3);
  rx.bottomRightCorner(2, 2) = rotation2(a);
  rz.topLeftCorner(2, 2) = rotation2(b);
  q = rz * rx;
  return q;
}

inline MatrixEnsemble transpose_support() {
  const auto prox = proximal_pair();
  const Matrix q = transpose_support_rotation();
  const double c[2] = {0.1, -0.5};
  const double b[2][2] = {{0.5, -1.0}, {1.0, 0.3}};
  std::vector<Matrix> mats;
  for (int i = 0; i < 2; ++i) {
    Matrix g = Matrix::Zero(3, 3);
    g.topLeftCorner(2, 2) = std::exp(0.3) * prox[static_cast<std::size_t>(i)];
    g(0, 2) = b[i][0];
    g(1, 2) = b[i][1];
    g(2, 2) = (i == 0 ? 1.0 : -1.0) * std::exp(c[i]);
    mats.push_back(q * g * q.transpose());
  }
  return MatrixEnsemble::uniform(3, mats, "transpose-support");
}

inline Subspace transpose_support_v1() {
  return Subspace(Matrix(transpose_support_rotation().leftCols(2)));
}

/// Upper triangular 2x2 with E log|a| = -0.2 on span(e1) and E log|c| = 0.3
/// on the quotient: beta_min = -0.2, attained on e1.
inline MatrixEnsemble two_block_floor() {
  std::vector<Matrix> mats;
  const double a[2] = {0.1, -0.5}, c[2] = {0.6, 0.0}, b[2] = {1.0, -2.0};
  for (int i = 0; i < 2; ++i) {
    Matrix g(2, 2);
    g << std::exp(a[i]), b[i], 0.0, std::exp(c[i]);
    mats.push_back(g);
  }
  return MatrixEnsemble::uniform(2, mats, "two-block-floor");
}

inline constexpr double kTwoBlockBetaMin = -0.2;

/// Preserves span(e1) and span(e2) with equal exponents: two distinct
/// ergodic stationary measures (the point masses on the two lines).
inline MatrixEnsemble two_lines() {
  return MatrixEnsemble::uniform(2, {diag({2.0, 0.5}), diag({0.5, 2.0})}, "two-lines");
}

}  // namespace projlift::designs
