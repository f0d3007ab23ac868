#pragma once

// Probability measures on GL(d): finitely supported ensembles and seeded
// samplers, plus the algebraic transformations used throughout (transpose,
// block restriction/quotient, exterior powers, affine embeddings).

#include <algorithm>
#include <complex>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "projlift/errors.hpp"
#include "projlift/estimate.hpp"
#include "projlift/linalg.hpp"
#include "projlift/parallel.hpp"

namespace projlift {

struct Atom {
  double weight = 0.0;
  Matrix matrix;
};

using SamplerFn = std::function<Matrix(Rng&)>;

class MatrixEnsemble {
 public:
  MatrixEnsemble() = default;

  /// Weights must be positive and sum to 1 within 1e-12; every atom must be
  /// square of size dim and invertible.
  static MatrixEnsemble finite(int dim, std::vector<Atom> atoms, std::string label = {}) {
    require(dim >= 1, "MatrixEnsemble: dim must be positive");
    require(!atoms.empty(), "MatrixEnsemble: empty support");
    MatrixEnsemble e;
    e.dim_ = dim;
    e.label_ = std::move(label);
    long double total = 0.0L;
    for (const auto& a : atoms) {
      require(a.weight > 0.0 && std::isfinite(a.weight), "MatrixEnsemble: weights must be positive");
      require(a.matrix.rows() == dim && a.matrix.cols() == dim, "MatrixEnsemble: atom has wrong shape");
      if (!is_invertible(a.matrix)) throw InvalidArgument("MatrixEnsemble: atom is not invertible");
      total += a.weight;
    }
    require(std::abs(static_cast<double>(total) - 1.0) <= 1e-12, "MatrixEnsemble: weights must sum to 1");
    e.atoms_ = std::move(atoms);
    e.cumulative_.reserve(e.atoms_.size());
    long double acc = 0.0L;
    for (const auto& a : e.atoms_) {
      acc += a.weight;
      e.cumulative_.push_back(static_cast<double>(acc / total));
    }
    e.cumulative_.back() = 1.0;
    return e;
  }

  /// Equal weights over the given matrices.
  static MatrixEnsemble uniform(int dim, const std::vector<Matrix>& matrices, std::string label = {}) {
    std::vector<Atom> atoms;
    for (const auto& m : matrices) atoms.push_back({1.0 / static_cast<double>(matrices.size()), m});
    return finite(dim, std::move(atoms), std::move(label));
  }

  static MatrixEnsemble dirac(const Matrix& g, std::string label = {}) {
    return finite(static_cast<int>(g.rows()), {{1.0, g}}, std::move(label));
  }

  static MatrixEnsemble sampler(int dim, SamplerFn fn, std::string label = {}) {
    require(dim >= 1, "MatrixEnsemble: dim must be positive");
    require(static_cast<bool>(fn), "MatrixEnsemble: empty sampler");
    MatrixEnsemble e;
    e.dim_ = dim;
    e.label_ = std::move(label);
    e.sampler_ = std::make_shared<const SamplerFn>(std::move(fn));
    return e;
  }

  int dim() const { return dim_; }
  const std::string& label() const { return label_; }
  bool is_finite() const { return !sampler_; }

  const std::vector<Atom>& atoms() const {
    if (!is_finite()) throw InvalidArgument("MatrixEnsemble: sampler ensembles have no atom list");
    return atoms_;
  }

  std::size_t sample_index(Rng& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), atoms_.size() - 1);
  }

  /// Returns a reference to the drawn atom, or fills scratch for samplers.
  /// Avoids a heap allocation per step on hot paths.
  const Matrix& sample_into(Rng& rng, Matrix& scratch) const {
    if (is_finite()) return atoms_[sample_index(rng)].matrix;
    scratch = (*sampler_)(rng);
    if (scratch.rows() != dim_ || scratch.cols() != dim_)
      throw NumericalError("sampler produced a matrix of the wrong shape");
    if (!is_invertible(scratch)) throw NumericalError("sampler produced a singular or non-finite matrix");
    return scratch;
  }

  Matrix sample(Rng& rng) const {
    Matrix scratch;
    return sample_into(rng, scratch);
  }

  /// Applies f to every atom (weights preserved) or composes it with the
  /// sampler.
  template <class F>
  MatrixEnsemble map(F f, int new_dim, std::string new_label) const {
    if (is_finite()) {
      std::vector<Atom> out;
      out.reserve(atoms_.size());
      for (const auto& a : atoms_) out.push_back({a.weight, f(a.matrix)});
      return finite(new_dim, std::move(out), std::move(new_label));
    }
    auto inner = sampler_;
    const int d = dim_;
    return sampler(
        new_dim,
        [inner, f, d](Rng& rng) {
          Matrix g = (*inner)(rng);
          if (g.rows() != d || !is_invertible(g)) throw NumericalError("sampler produced a singular or non-finite matrix");
          return Matrix(f(g));
        },
        std::move(new_label));
  }

 private:
  int dim_ = 0;
  std::string label_;
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
  std::shared_ptr<const SamplerFn> sampler_;
};

inline Matrix sample(const MatrixEnsemble& ens, Rng& rng) { return ens.sample(rng); }

/// Integral of log N(g): exact for finite support, Monte Carlo for samplers
/// (n_samples draws split into 20 batches for the standard error).
inline GrowthEstimate first_moment(const MatrixEnsemble& ens, int n_samples, Rng& rng) {
  if (ens.is_finite()) {
    long double acc = 0.0L;
    for (const auto& a : ens.atoms()) {
      const double v = std::log(gauge_n(a.matrix));
      if (!std::isfinite(v)) throw NumericalError("first_moment: non-finite value");
      acc += a.weight * v;
    }
    GrowthEstimate e;
    e.value = static_cast<double>(acc);
    e.repetitions = 1;
    return e;
  }
  require(n_samples >= 2, "first_moment: need at least two samples");
  const int batches = std::min(20, n_samples);
  std::vector<double> means(static_cast<std::size_t>(batches), 0.0);
  std::vector<long double> sums(static_cast<std::size_t>(batches), 0.0L);
  std::vector<int> counts(static_cast<std::size_t>(batches), 0);
  for (int i = 0; i < n_samples; ++i) {
    const double v = std::log(gauge_n(ens.sample(rng)));
    if (!std::isfinite(v)) throw NumericalError("first_moment: non-finite value");
    sums[static_cast<std::size_t>(i % batches)] += v;
    ++counts[static_cast<std::size_t>(i % batches)];
  }
  for (int b = 0; b < batches; ++b)
    means[static_cast<std::size_t>(b)] = static_cast<double>(sums[static_cast<std::size_t>(b)] / counts[static_cast<std::size_t>(b)]);
  return estimate_from_samples(means, 1);
}

inline MatrixEnsemble transpose_ensemble(const MatrixEnsemble& ens) {
  return ens.map([](const Matrix& g) { return Matrix(g.transpose()); }, ens.dim(), ens.label() + "^t");
}

inline MatrixEnsemble wedge_ensemble(const MatrixEnsemble& ens, int k) {
  require(k >= 1 && k <= ens.dim(), "wedge_ensemble: k out of range");
  if (k == 1) return ens;
  return ens.map([k](const Matrix& g) { return wedge_power(g, k); }, static_cast<int>(binomial(ens.dim(), k)),
                 "wedge" + std::to_string(k) + "(" + ens.label() + ")");
}

// ---------------------------------------------------------------------------
// Invariant subspace and block structure

/// An invariant subspace W (dim r) of R^d together with an orthogonal adapted
/// basis whose first r columns span W. In that basis every group element has
/// the block form [[A, B], [0, C]].
class BlockSystem {
 public:
  struct Blocks {
    Matrix a;  // r x r, action on W
    Matrix b;  // r x (d-r)
    Matrix c;  // (d-r) x (d-r), action on V/W
  };

  BlockSystem() = default;

  /// Adapted basis = [orthonormal basis of W | orthonormal complement].
  explicit BlockSystem(const Subspace& invariant, double block_tol = 1e-9)
      : BlockSystem(adapted_from(invariant), static_cast<int>(invariant.dim()), block_tol) {}

  BlockSystem(Matrix adapted_basis, int r, double block_tol = 1e-9)
      : basis_(std::move(adapted_basis)), r_(r), tol_(block_tol) {
    require(basis_.rows() == basis_.cols(), "BlockSystem: adapted basis must be square");
    require(r_ >= 0 && r_ <= basis_.rows(), "BlockSystem: invalid invariant dimension");
    require(block_tol >= 0.0, "BlockSystem: negative tolerance");
    const Matrix gram = basis_.transpose() * basis_;
    require((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-10,
            "BlockSystem: adapted basis must be orthogonal");
    identity_ = basis_.isIdentity(0.0);
    invariant_ = Subspace(basis_.leftCols(r_));
  }

  /// W = span(e_1..e_r), adapted basis = identity.
  static BlockSystem leading(int d, int r, double block_tol = 1e-9) {
    return BlockSystem(Matrix::Identity(d, d), r, block_tol);
  }

  int dim() const { return static_cast<int>(basis_.rows()); }
  int invariant_dim() const { return r_; }
  int quotient_dim() const { return dim() - r_; }
  double block_tol() const { return tol_; }
  const Matrix& adapted_basis() const { return basis_; }
  const Subspace& invariant() const { return invariant_; }
  Subspace complement() const { return Subspace(basis_.rightCols(quotient_dim())); }

  Matrix to_adapted(const Matrix& g) const {
    if (identity_) return g;
    return basis_.transpose() * g * basis_;
  }
  Vector to_adapted(const Vector& v) const {
    if (identity_) return v;
    return basis_.transpose() * v;
  }
  Vector from_adapted(const Vector& v) const {
    if (identity_) return v;
    return basis_ * v;
  }

  /// Frobenius norm of the lower-left block relative to |g|_F.
  double invariance_defect(const Matrix& g) const {
    require(g.rows() == dim() && g.cols() == dim(), "BlockSystem: matrix has wrong shape");
    const Matrix h = to_adapted(g);
    const double scale = h.norm();
    const double ll = h.bottomLeftCorner(quotient_dim(), r_).norm();
    return scale > 0.0 ? ll / scale : ll;
  }

  bool preserves(const Matrix& g) const { return invariance_defect(g) <= tol_; }

  Blocks blocks(const Matrix& g) const {
    require(g.rows() == dim() && g.cols() == dim(), "BlockSystem: matrix has wrong shape");
    const Matrix h = to_adapted(g);
    const double scale = h.norm();
    if (h.bottomLeftCorner(quotient_dim(), r_).norm() > tol_ * scale)
      throw InvalidArgument("BlockSystem: matrix does not preserve the invariant subspace");
    return {h.topLeftCorner(r_, r_), h.topRightCorner(r_, quotient_dim()),
            h.bottomRightCorner(quotient_dim(), quotient_dim())};
  }

 private:
  static Matrix adapted_from(const Subspace& w) {
    const Eigen::Index d = w.ambient_dim();
    Matrix basis(d, d);
    basis << w.basis(), orthogonal_complement(w).basis();
    return basis;
  }

  Matrix basis_;
  int r_ = 0;
  double tol_ = 1e-9;
  bool identity_ = false;
  Subspace invariant_;
};

/// r x r ensemble of A-blocks (action on W).
inline MatrixEnsemble restrict_to_invariant(const BlockSystem& bs, const MatrixEnsemble& ens) {
  require(ens.dim() == bs.dim(), "restrict_to_invariant: dimension mismatch");
  require(bs.invariant_dim() >= 1, "restrict_to_invariant: invariant subspace is trivial");
  return ens.map([bs](const Matrix& g) { return bs.blocks(g).a; }, bs.invariant_dim(), ens.label() + "|W");
}

/// (d-r) x (d-r) ensemble of C-blocks (action on V/W).
inline MatrixEnsemble quotient_ensemble(const BlockSystem& bs, const MatrixEnsemble& ens) {
  require(ens.dim() == bs.dim(), "quotient_ensemble: dimension mismatch");
  require(bs.quotient_dim() >= 1, "quotient_ensemble: quotient is trivial");
  return ens.map([bs](const Matrix& g) { return bs.blocks(g).c; }, bs.quotient_dim(), ens.label() + "/W");
}

/// Action on an invariant subspace S in the coordinates of S's basis.
inline MatrixEnsemble restrict_to_subspace(const MatrixEnsemble& ens, const Subspace& s, double tol = 1e-7) {
  require(s.ambient_dim() == ens.dim() && s.dim() >= 1, "restrict_to_subspace: bad subspace");
  return restrict_to_invariant(BlockSystem(s, tol), ens);
}

// ---------------------------------------------------------------------------
// Affine embeddings and the SL2(C) family

struct AffineAtom {
  double weight = 0.0;
  Matrix linear;
  Vector translation;
};

inline Matrix affine_matrix(const Matrix& linear, const Vector& translation) {
  require(linear.rows() == linear.cols() && translation.size() == linear.rows(),
          "affine_matrix: dimension mismatch");
  const Eigen::Index d = linear.rows();
  Matrix m = Matrix::Zero(d + 1, d + 1);
  m.topLeftCorner(d, d) = linear;
  m.topRightCorner(d, 1) = translation;
  m(d, d) = 1.0;
  return m;
}

/// Embeds x -> A x + b as [[A, b], [0, 1]] in GL(d+1); W = span(e_1..e_d).
inline std::pair<MatrixEnsemble, BlockSystem> build_affine_embedding(const std::vector<AffineAtom>& atoms,
                                                                     std::string label = "affine") {
  require(!atoms.empty(), "build_affine_embedding: empty support");
  const int d = static_cast<int>(atoms.front().linear.rows());
  std::vector<Atom> out;
  for (const auto& a : atoms) {
    require(a.linear.rows() == d && a.translation.size() == d, "build_affine_embedding: dimension mismatch");
    out.push_back({a.weight, affine_matrix(a.linear, a.translation)});
  }
  return {MatrixEnsemble::finite(d + 1, std::move(out), std::move(label)), BlockSystem::leading(d + 1, d, 0.0)};
}

/// Independent linear part and translation sampler.
inline std::pair<MatrixEnsemble, BlockSystem> build_affine_embedding(const MatrixEnsemble& linear,
                                                                     std::function<Vector(Rng&)> translations,
                                                                     std::string label = "affine") {
  require(static_cast<bool>(translations), "build_affine_embedding: empty translation sampler");
  const int d = linear.dim();
  auto fn = [linear, translations, d](Rng& rng) {
    Matrix a = linear.sample(rng);
    Vector b = translations(rng);
    if (b.size() != d) throw InvalidArgument("build_affine_embedding: translation has wrong dimension");
    return affine_matrix(a, b);
  };
  return {MatrixEnsemble::sampler(d + 1, fn, std::move(label)), BlockSystem::leading(d + 1, d, 0.0)};
}

using Complex2 = Eigen::Matrix2cd;

/// Real 4x4 realization of a complex 2x2 matrix on C^2 = R^4 with
/// z_j = x_{2j} + i x_{2j+1}. Commutes with J = diag(J1, J1).
inline Matrix realify(const Complex2& m) {
  Matrix r(4, 4);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) {
      const double a = m(p, q).real();
      const double b = m(p, q).imag();
      r(2 * p, 2 * q) = a;
      r(2 * p, 2 * q + 1) = -b;
      r(2 * p + 1, 2 * q) = b;
      r(2 * p + 1, 2 * q + 1) = a;
    }
  return r;
}

/// The complex structure J = diag(J1, J1), J1 = [[0, -1], [1, 0]].
inline Matrix complex_structure() { return realify(Complex2{{{0, 1}, {0, 0}}, {{0, 0}, {0, 1}}}); }

/// exp of a traceless 2x2 complex matrix: X^2 = -det(X) I, so
/// exp(X) = cosh(s) I + sinh(s)/s X with s^2 = -det X.
inline Complex2 sl2c_exp(const Complex2& x) {
  const std::complex<double> s = std::sqrt(-x.determinant());
  const std::complex<double> c = std::cosh(s);
  const std::complex<double> k = std::abs(s) < 1e-8 ? std::complex<double>(1.0) + s * s / 6.0 : std::sinh(s) / s;
  return c * Complex2::Identity() + k * x;
}

inline Complex2 sl2c_inverse(const Complex2& g) {
  Complex2 r;
  r << g(1, 1), -g(0, 1), -g(1, 0), g(0, 0);
  return r;
}

inline constexpr std::uint64_t kDefaultSl2cSeed = 1;

/// Random elements of SL2(C) inside SL4(R): two generic one-parameter
/// generators exp(X1), exp(X2) followed by short random words in the
/// generators and their inverses. Equal weights.
inline std::vector<Complex2> sl2c_atoms(int atom_count, std::uint64_t seed, double scale = 0.8) {
  require(atom_count >= 2, "build_sl2c_ensemble: need at least two atoms");
  Rng rng(derive_seed(seed, 0x51C2));
  std::normal_distribution<double> normal(0.0, scale);
  auto random_traceless = [&] {
    Complex2 x;
    const std::complex<double> a(normal(rng), normal(rng));
    x << a, std::complex<double>(normal(rng), normal(rng)), std::complex<double>(normal(rng), normal(rng)), -a;
    return x;
  };
  const Complex2 g1 = sl2c_exp(random_traceless());
  const Complex2 g2 = sl2c_exp(random_traceless());
  const Complex2 letters[4] = {g1, g2, sl2c_inverse(g1), sl2c_inverse(g2)};
  std::vector<Complex2> atoms{g1, g2};
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_int_distribution<int> length(2, 3);
  while (static_cast<int>(atoms.size()) < atom_count) {
    Complex2 w = Complex2::Identity();
    const int len = length(rng);
    for (int i = 0; i < len; ++i) w = letters[pick(rng)] * w;
    atoms.push_back(w);
  }
  return atoms;
}

inline MatrixEnsemble build_sl2c_ensemble(int atom_count, std::uint64_t seed = kDefaultSl2cSeed) {
  std::vector<Matrix> mats;
  for (const auto& c : sl2c_atoms(atom_count, seed)) mats.push_back(realify(c));
  return MatrixEnsemble::uniform(4, mats, "sl2c(" + std::to_string(atom_count) + "," + std::to_string(seed) + ")");
}

}  // namespace projlift
