#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "projlift/designs.hpp"
#include "projlift/fkh.hpp"

using namespace projlift;

namespace {

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Vector unit(int d, int i) { return Vector::Unit(d, i); }

// Exact oracle: rank of integer vectors by fraction-free elimination.
using IntVec = std::vector<__int128>;

int exact_rank(std::vector<IntVec> rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  int rank = 0;
  __int128 prev = 1;
  for (std::size_t c = 0; c < cols && rank < static_cast<int>(rows.size()); ++c) {
    std::size_t piv = static_cast<std::size_t>(rank);
    while (piv < rows.size() && rows[piv][c] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[static_cast<std::size_t>(rank)]);
    const IntVec& p = rows[static_cast<std::size_t>(rank)];
    for (std::size_t i = static_cast<std::size_t>(rank) + 1; i < rows.size(); ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) rows[i][j] = (p[c] * rows[i][j] - rows[i][c] * p[j]) / prev;
      rows[i][c] = 0;
    }
    prev = p[c];
    ++rank;
  }
  return rank;
}

/// Dimension of the smallest subspace containing seed and closed under the
/// integer atoms: span of all words of length < d applied to the seed.
int exact_orbit_dim(const std::vector<std::vector<std::vector<long long>>>& atoms, const std::vector<long long>& seed) {
  const std::size_t d = seed.size();
  std::vector<IntVec> frontier{IntVec(seed.begin(), seed.end())}, all = frontier;
  for (std::size_t len = 1; len < d; ++len) {
    std::vector<IntVec> next;
    for (const auto& v : frontier)
      for (const auto& a : atoms) {
        IntVec w(d, 0);
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = 0; j < d; ++j) w[i] += static_cast<__int128>(a[i][j]) * v[j];
        next.push_back(w);
      }
    all.insert(all.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return exact_rank(all);
}

MatrixEnsemble to_ensemble(const std::vector<std::vector<std::vector<long long>>>& atoms) {
  std::vector<Matrix> mats;
  for (const auto& a : atoms) {
    const auto d = static_cast<Eigen::Index>(a.size());
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) m(i, j) = static_cast<double>(a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    mats.push_back(m);
  }
  return MatrixEnsemble::uniform(static_cast<int>(atoms.front().size()), mats);
}

bool closed_under(const MatrixEnsemble& ens, const Subspace& s, double tol) {
  for (const auto& a : ens.atoms()) {
    const Matrix img = a.matrix * s.basis();
    for (Eigen::Index j = 0; j < img.cols(); ++j)
      if (s.residual(img.col(j)).norm() > tol * img.col(j).norm()) return false;
  }
  return true;
}

}  // namespace

TEST(InvariantSubspace, Examples) {
  const Subspace a = find_invariant_subspace(MatrixEnsemble::dirac(m2(2, 0, 0, 3)), {unit(2, 0)});
  ASSERT_EQ(a.dim(), 1);
  EXPECT_NEAR(std::abs(a.basis()(0, 0)), 1.0, 1e-14);
  const auto pair = MatrixEnsemble::uniform(2, {m2(1, 1, 0, 1), m2(1, 0, 0, 2)});
  const Subspace b = find_invariant_subspace(pair, {unit(2, 0)});
  ASSERT_EQ(b.dim(), 1);
  EXPECT_NEAR(std::abs(b.basis()(0, 0)), 1.0, 1e-14);
  EXPECT_EQ(find_invariant_subspace(pair, {unit(2, 1)}).dim(), 2);
}

TEST(InvariantSubspace, MatchesExactOrbitSpan) {
  Rng rng(21);
  std::uniform_int_distribution<int> entry(-3, 3);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 2 + trial % 4;
    const int r = trial % d;  // r = 0: no forced structure
    std::vector<std::vector<std::vector<long long>>> atoms;
    for (int k = 0; k < 2; ++k) {
      std::vector<std::vector<long long>> a(static_cast<std::size_t>(d), std::vector<long long>(static_cast<std::size_t>(d), 0));
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          if (r == 0 || !(i >= r && j < r)) a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = entry(rng);
      atoms.push_back(a);
    }
    MatrixEnsemble ens;
    try {
      ens = to_ensemble(atoms);
    } catch (const InvalidArgument&) {
      continue;  // singular draw
    }
    std::vector<long long> seed(static_cast<std::size_t>(d), 0);
    for (int i = 0; i < (trial % 2 ? d : std::max(1, r)); ++i) seed[static_cast<std::size_t>(i)] = entry(rng);
    if (std::all_of(seed.begin(), seed.end(), [](long long x) { return x == 0; })) seed[0] = 1;
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = static_cast<double>(seed[static_cast<std::size_t>(i)]);
    const Subspace s = find_invariant_subspace(ens, {v});
    EXPECT_EQ(s.dim(), exact_orbit_dim(atoms, seed)) << "trial " << trial;
    EXPECT_TRUE(closed_under(ens, s, 1e-8));
    ++checked;
  }
  EXPECT_GT(checked, 150);
}

TEST(Fkh, Sl2cIsIrreducible) {
  Rng rng(1);
  const auto rep = fkh_estimate(build_sl2c_ensemble(6, kDefaultSl2cSeed), std::nullopt, 20000, 10, rng);
  EXPECT_EQ(rep.levels(), 1);
  EXPECT_TRUE(rep.space(2).is_zero());
}

TEST(Fkh, AffineContractingAndExpanding) {
  Rng rng(2);
  auto [con, bsc] = designs::affine_scalar(designs::kContractingLogA);
  const auto rc = fkh_estimate(con, bsc, 100000, 20, rng);
  ASSERT_EQ(rc.levels(), 2);
  EXPECT_LE(principal_angle_distance(rc.space(2), bsc.invariant()), 1e-6);
  EXPECT_LE(std::abs(rc.beta(2) - designs::kContractingLogA), 3 * rc.exponents[1].std_error);
  EXPECT_NEAR(rc.beta(1), 0.0, 1e-3);

  auto [ex, bse] = designs::affine_scalar(designs::kExpandingLogA);
  EXPECT_EQ(fkh_estimate(ex, bse, 100000, 20, rng).levels(), 1);
  // Without the hint the eigenvector seeds still find W.
  EXPECT_EQ(fkh_estimate(con, std::nullopt, 100000, 20, rng).levels(), 2);
}

TEST(Fkh, MixedBlockHasThreeLevels) {
  Rng rng(3);
  const auto ens = designs::mixed_block();
  const auto rep = fkh_estimate(ens, std::nullopt, 50000, 20, rng);
  ASSERT_EQ(rep.levels(), 3);
  const double expect[3] = {0.5, 0.1, -0.3};
  for (int i = 1; i <= 3; ++i)
    EXPECT_LE(std::abs(rep.beta(i) - expect[i - 1]), 3 * rep.exponents[static_cast<std::size_t>(i - 1)].std_error + 1e-3)
        << "level " << i;
  EXPECT_LE(principal_angle_distance(rep.space(2), designs::mixed_block_w_prime()), 1e-6);
  const int e1[1] = {0};
  EXPECT_LE(principal_angle_distance(rep.space(3), Subspace::coordinate(3, e1)), 1e-6);

  // Exponents strictly decrease and a random vector of each layer grows at
  // that layer's rate.
  for (int i = 1; i <= 3; ++i) {
    if (i > 1) {
      EXPECT_LT(rep.beta(i), rep.beta(i - 1));
    }
    const Subspace fi = rep.space(i), next = rep.space(i + 1);
    Vector v = fi.basis() * random_unit_vector(static_cast<int>(fi.dim()), rng);
    ASSERT_GT(next.is_zero() ? 1.0 : next.sine_to(v), 1e-3);
    const auto g = vector_growth(ens, v, 50000, 20, rng);
    const auto& b = rep.exponents[static_cast<std::size_t>(i - 1)];
    EXPECT_LE(std::abs(g.value - b.value), 3 * combined_error(g, b) + 10.0 / 50000) << "level " << i;
  }
}

TEST(Fkh, QuotientLayersHaveOneLevel) {
  Rng rng(4);
  const auto ens = designs::mixed_block();
  const auto rep = fkh_estimate(ens, std::nullopt, 20000, 10, rng);
  ASSERT_EQ(rep.levels(), 3);
  for (int i = 1; i <= rep.levels(); ++i) {
    // F_i / F_{i+1} via the action on F_i restricted, then quotiented.
    const Subspace fi = rep.space(i), next = rep.space(i + 1);
    const MatrixEnsemble on_fi = fi.is_full() ? ens : restrict_to_subspace(ens, fi);
    MatrixEnsemble layer = on_fi;
    if (!next.is_zero()) {
      const Matrix coords = fi.basis().transpose() * next.basis();
      Eigen::HouseholderQR<Matrix> qr(coords);
      const Subspace inside(Matrix(qr.householderQ() * Matrix::Identity(coords.rows(), coords.cols())));
      layer = quotient_ensemble(BlockSystem(inside, 1e-7), on_fi);
    }
    EXPECT_EQ(fkh_estimate(layer, std::nullopt, 20000, 10, rng).levels(), 1) << "layer " << i;
  }
}

TEST(TransposeDual, IrreducibleGivesFullSpace) {
  Rng rng(5);
  const Subspace v = transpose_dual_space(designs::proximal2(), 1, 20000, 10, rng);
  EXPECT_TRUE(v.is_full());
}

TEST(TransposeDual, MatchesDesignedSpace) {
  Rng rng(6);
  const auto ens = designs::transpose_support();
  const Subspace v = transpose_dual_space(ens, 1, 20000, 20, rng);
  ASSERT_EQ(v.dim(), 2);
  EXPECT_LE(principal_angle_distance(v, designs::transpose_support_v1()), 1e-6);
}

TEST(TransposeDual, RejectsLevelBeyondFiltration) {
  Rng rng(7);
  EXPECT_THROW(transpose_dual_space(designs::proximal2(), 2, 2000, 4, rng), InvalidArgument);
}
