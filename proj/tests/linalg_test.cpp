#include <gtest/gtest.h>

#include <cmath>

#include "projlift/linalg.hpp"
#include "projlift/parallel.hpp"

using namespace projlift;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Matrix random_matrix(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

}  // namespace

TEST(ProjNormalize, CanonicalSign) {
  EXPECT_EQ(proj_normalize(vec({0, -3})).coords(), vec({0, 1}));
  EXPECT_EQ(proj_normalize(vec({1, 0})).coords(), vec({1, 0}));
  EXPECT_NEAR((proj_normalize(vec({3, 4})).coords() - vec({0.6, 0.8})).norm(), 0.0, 1e-15);
}

TEST(ProjNormalize, TiesGoToLowestIndex) {
  EXPECT_GT(proj_normalize(vec({-1, 1})).coords()(0), 0.0);
  EXPECT_GT(proj_normalize(vec({1, -1})).coords()(0), 0.0);
}

TEST(ProjNormalize, RejectsZeroAndNonFinite) {
  EXPECT_THROW(proj_normalize(vec({0, 0})), InvalidArgument);
  EXPECT_THROW(proj_normalize(vec({NAN, 1})), NumericalError);
}

TEST(ProjNormalize, IdempotentAndSignInvariant) {
  Rng rng(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    Vector v(1 + trial % 6);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
    const ProjPoint p = proj_normalize(v);
    EXPECT_LE(proj_distance(proj_normalize(p.coords()), p), 1e-15);
    EXPECT_EQ(proj_normalize(-v), p);
    EXPECT_LE((proj_normalize(3.7 * v).coords() - p.coords()).norm(), 1e-15);
  }
}

TEST(ProjDistance, Examples) {
  const auto e1 = proj_normalize(vec({1, 0})), e2 = proj_normalize(vec({0, 1}));
  EXPECT_EQ(proj_distance(e1, e1), 0.0);
  EXPECT_NEAR(proj_distance(e1, e2), 1.0, 1e-15);
  EXPECT_NEAR(proj_distance(e1, proj_normalize(vec({1, 1}))), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(proj_distance(e1, proj_normalize(vec({1, 0, 0}))), InvalidArgument);
}

TEST(WedgePower, Examples) {
  const Matrix d = vec({3, 2, 1}).asDiagonal();
  EXPECT_EQ(wedge_power(d, 2), Matrix(vec({6, 3, 2}).asDiagonal()));
  EXPECT_NEAR(wedge_power(d, 3)(0, 0), 6.0, 1e-14);
  EXPECT_EQ(wedge_power(d, 1), d);
  for (int k = 1; k <= 4; ++k) {
    const int c = static_cast<int>(binomial(4, k));
    EXPECT_EQ(wedge_power(Matrix::Identity(4, 4), k), Matrix::Identity(c, c));
  }
  EXPECT_THROW(wedge_power(d, 4), InvalidArgument);
  EXPECT_THROW(wedge_power(d, 0), InvalidArgument);
}

TEST(WedgePower, LexicographicBasis) {
  const auto s = k_subsets(4, 2);
  ASSERT_EQ(s.size(), 6u);
  EXPECT_EQ(s[0], (std::vector<int>{0, 1}));
  EXPECT_EQ(s[1], (std::vector<int>{0, 2}));
  EXPECT_EQ(s[5], (std::vector<int>{2, 3}));
}

TEST(WedgePower, Multiplicative) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 4;
    const Matrix g = random_matrix(d, rng), h = random_matrix(d, rng);
    for (int k = 1; k <= d; ++k) {
      const Matrix lhs = wedge_power(g * h, k), rhs = wedge_power(g, k) * wedge_power(h, k);
      EXPECT_LE((lhs - rhs).norm(), 1e-10 * rhs.norm());
    }
  }
}

TEST(WedgePower, NormIsProductOfSingularValues) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 4;
    const Matrix g = random_matrix(d, rng);
    const Vector sv = Eigen::JacobiSVD<Matrix>(g).singularValues();
    double prod = 1.0;
    for (int k = 1; k <= d; ++k) {
      prod *= sv(k - 1);
      EXPECT_NEAR(operator_norm(wedge_power(g, k)), prod, 1e-9 * prod);
    }
  }
}

TEST(WedgePower, TopMinorsAgreeWithDeterminant) {
  Rng rng(5);
  for (int d = 1; d <= 5; ++d) {
    const Matrix g = random_matrix(d, rng);
    EXPECT_NEAR(small_determinant(g), g.determinant(), 1e-10 * std::max(1.0, std::abs(g.determinant())));
  }
}

TEST(GaugeN, Examples) {
  EXPECT_DOUBLE_EQ(gauge_n(Matrix::Identity(3, 3)), 1.0);
  EXPECT_NEAR(gauge_n(Matrix(vec({2, 0.5}).asDiagonal())), 2.0, 1e-14);
  EXPECT_NEAR(gauge_n(Matrix(vec({4, 1}).asDiagonal())), 4.0, 1e-14);
  Matrix singular = Matrix::Zero(2, 2);
  singular(0, 0) = 1.0;
  EXPECT_THROW(gauge_n(singular), NumericalError);
}

TEST(RankSpan, Examples) {
  std::vector<Vector> a{vec({1, 0}), vec({2, 0})};
  EXPECT_EQ(rank_span(a).dim(), 1);
  std::vector<Vector> b{vec({1, 0}), vec({0, 1})};
  EXPECT_EQ(rank_span(b).dim(), 2);
  std::vector<Vector> c{vec({1, 0, 0}), vec({1, 1e-12, 0})};
  EXPECT_EQ(rank_span(c, 1e-8).dim(), 1);
  EXPECT_THROW(rank_span(std::vector<Vector>{}), InvalidArgument);
}

TEST(RankSpan, OrthonormalAndStable) {
  Rng rng(6);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + trial % 5, m = 1 + trial % 3;
    const Matrix gen = random_matrix(d, rng).leftCols(std::min(m, d));
    std::vector<Vector> vs;
    for (int i = 0; i < 6; ++i) {
      Vector w(gen.cols());
      for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = normal(rng);
      vs.push_back(gen * w);
    }
    const Subspace s = rank_span(vs);
    EXPECT_EQ(s.dim(), gen.cols());
    const Matrix gram = s.basis().transpose() * s.basis();
    EXPECT_LE((gram - Matrix::Identity(s.dim(), s.dim())).norm(), 1e-12);
    EXPECT_LE(principal_angle_distance(column_span(s.basis()), s), 1e-10);
  }
}

TEST(PrincipalAngle, Examples) {
  const int i0[1] = {0}, i1[1] = {1};
  const Subspace e1 = Subspace::coordinate(2, i0), e2 = Subspace::coordinate(2, i1);
  EXPECT_EQ(principal_angle_distance(e1, e1), 0.0);
  EXPECT_NEAR(principal_angle_distance(e1, e2), 1.0, 1e-15);
  EXPECT_NEAR(principal_angle_distance(e1, Subspace(Matrix(vec({1, 1}).normalized()))), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(principal_angle_distance(e1, Subspace::full(2)), InvalidArgument);
}

TEST(SubspaceOps, SumIntersectionComplement) {
  const int a[2] = {0, 1}, b[2] = {1, 2};
  const Subspace s = Subspace::coordinate(3, a), t = Subspace::coordinate(3, b);
  EXPECT_EQ(subspace_sum(s, t).dim(), 3);
  const Subspace i = subspace_intersection(s, t);
  ASSERT_EQ(i.dim(), 1);
  EXPECT_NEAR(std::abs(i.basis()(1, 0)), 1.0, 1e-12);
  const Subspace c = orthogonal_complement(s);
  ASSERT_EQ(c.dim(), 1);
  EXPECT_NEAR(std::abs(c.basis()(2, 0)), 1.0, 1e-12);
  EXPECT_TRUE(subspace_contains(s, i));
  EXPECT_FALSE(subspace_contains(i, s));
}

TEST(Subspace, RejectsNonOrthonormalBasis) {
  Matrix m(2, 1);
  m << 1, 1;
  EXPECT_THROW(Subspace{m}, InvalidArgument);
}

TEST(Invertibility, ScaleFree) {
  EXPECT_TRUE(is_invertible(1e-8 * Matrix::Identity(10, 10)));
  EXPECT_TRUE(is_invertible(1e8 * Matrix::Identity(10, 10)));
  Matrix s = Matrix::Identity(3, 3);
  s(2, 2) = 0.0;
  EXPECT_FALSE(is_invertible(s));
}

TEST(Parallel, SeedsDependOnStreamOnly) {
  Rng a = make_rng(5, 3), b = make_rng(5, 3), c = make_rng(5, 4);
  EXPECT_EQ(a(), b());
  EXPECT_NE(make_rng(5, 3)(), c());
}

TEST(Parallel, ResultIndependentOfThreadCount) {
  auto run = [](unsigned threads) {
    set_thread_count(threads);
    std::vector<double> out(37);
    parallel_for(out.size(), [&](std::size_t i) {
      Rng r = make_rng(9, i);
      out[i] = std::uniform_real_distribution<double>(0, 1)(r);
    });
    set_thread_count(0);
    return out;
  };
  EXPECT_EQ(run(1), run(4));
}

TEST(Parallel, LowestIndexExceptionWins) {
  set_thread_count(4);
  try {
    parallel_for(10, [](std::size_t i) {
      if (i == 3 || i == 7) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "3");
  }
  set_thread_count(0);
}
