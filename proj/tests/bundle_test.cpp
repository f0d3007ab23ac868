#include <gtest/gtest.h>

#include <cmath>

#include "projlift/bundle.hpp"
#include "projlift/designs.hpp"

using namespace projlift;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix random_orthogonal(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return Eigen::HouseholderQR<Matrix>(m).householderQ();
}

Matrix random_block_triangular(int d, int r, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g;
  do {
    g = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (!(i >= r && j < r)) g(i, j) = normal(rng);
  } while (!is_invertible(g) || gauge_n(g) > 1e3);
  return g;
}

struct Case {
  BlockSystem bs;
  Matrix g, h;
  BundleState s;
};

Case random_case(Rng& rng) {
  const int d = std::uniform_int_distribution<int>(2, 5)(rng);
  const int r = std::uniform_int_distribution<int>(1, d - 1)(rng);
  const Matrix q = random_orthogonal(d, rng);
  Case c{BlockSystem(q, r, 1e-9), q * random_block_triangular(d, r, rng) * q.transpose(),
         q * random_block_triangular(d, r, rng) * q.transpose(), {}};
  const double scale = std::exp(std::uniform_real_distribution<double>(-3, 3)(rng));
  c.s = make_state(random_unit_vector(d - r, rng), scale * random_unit_vector(r, rng));
  return c;
}

}  // namespace

TEST(Chart, SplitExamples) {
  const auto bs = BlockSystem::leading(2, 1);
  const auto s0 = split_point(proj_normalize(vec({0, 1})), bs);
  EXPECT_NEAR(s0.theta(0), 1.0, 1e-15);
  EXPECT_NEAR(s0.t(0), 0.0, 1e-15);
  const auto s1 = split_point(proj_normalize(vec({4, 2})), bs);
  EXPECT_NEAR(s1.theta(0), 1.0, 1e-15);
  EXPECT_NEAR(s1.t(0), 2.0, 1e-14);
  EXPECT_THROW(split_point(proj_normalize(vec({1, 0})), bs), InvalidArgument);
  EXPECT_THROW(split_point(proj_normalize(vec({1, 1e-12})), bs), InvalidArgument);
}

TEST(Chart, JoinExamples) {
  const auto bs = BlockSystem::leading(2, 1);
  EXPECT_LE(proj_distance(join_state(make_state(vec({1}), vec({0})), bs), proj_normalize(vec({0, 1}))), 1e-15);
  EXPECT_LE(proj_distance(join_state(make_state(vec({1}), vec({2})), bs), proj_normalize(vec({2, 1}))), 1e-15);
}

TEST(Chart, SplitJoinRoundTrip) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto c = random_case(rng);
    const ProjPoint p = join_state(c.s, c.bs);
    const BundleState back = split_point(p, c.bs);
    EXPECT_LE((back.theta - c.s.theta).norm(), 1e-12);
    EXPECT_LE((back.t - c.s.t).norm(), 1e-11 * (1.0 + c.s.t.norm()));
  }
}

TEST(Chart, StatesAreCanonical) {
  const auto s = make_state(vec({-3}), vec({2}));
  EXPECT_EQ(s.theta(0), 1.0);
  EXPECT_EQ(s.t(0), -2.0);
}

TEST(Cocycle, Examples) {
  const auto bs = BlockSystem::leading(2, 1);
  const auto s = make_state(vec({1}), vec({4}));
  const auto same = cocycle_step(Matrix::Identity(2, 2), s, bs);
  EXPECT_EQ(same.theta, s.theta);
  EXPECT_EQ(same.t, s.t);
  const auto out = cocycle_step(m2(1, 0, 0, 2), s, bs);
  EXPECT_NEAR(out.theta(0), 1.0, 1e-15);
  EXPECT_NEAR(out.t(0), 2.0, 1e-15);
  // c < 0: theta flips to -1, the canonical pair is (1, -(a t + b)/|c|).
  const auto neg = cocycle_step(m2(2, 1, 0, -4), s, bs);
  EXPECT_NEAR(neg.theta(0), 1.0, 1e-15);
  EXPECT_NEAR(neg.t(0), -(2.0 * 4.0 + 1.0) / 4.0, 1e-15);
  EXPECT_THROW(cocycle_step(m2(0, 1, 1, 0), s, bs), InvalidArgument);
}

TEST(Cocycle, EquivarianceAndComposition) {
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    const auto c = random_case(rng);
    const ProjPoint lhs = join_state(cocycle_step(c.g, c.s, c.bs), c.bs);
    const ProjPoint rhs = proj_normalize(c.g * join_state(c.s, c.bs).coords());
    ASSERT_LE(proj_distance(lhs, rhs), 1e-10) << i;
    const auto two = cocycle_step(c.g, cocycle_step(c.h, c.s, c.bs), c.bs);
    const auto one = cocycle_step(c.g * c.h, c.s, c.bs);
    ASSERT_LE((two.theta - one.theta).norm(), 1e-10) << i;
    ASSERT_LE((two.t - one.t).norm(), 1e-10 * (1.0 + one.t.norm())) << i;
  }
}

TEST(Drift, Values) {
  EXPECT_EQ(drift_value(make_state(vec({1}), vec({0}))), 0.0);
  EXPECT_NEAR(drift_value(make_state(vec({1}), vec({std::exp(1.0) - 1.0}))), 1.0, 1e-15);
  EXPECT_NEAR(drift_value(make_state(vec({1}), vec({1}))), std::log(2.0), 1e-15);
}

TEST(Drift, StepBound) {
  const auto bs = BlockSystem::leading(2, 1);
  const auto s = make_state(vec({1}), vec({3}));
  const auto id = drift_step_bound_check(Matrix::Identity(2, 2), s, bs);
  EXPECT_EQ(id.delta, 0.0);
  EXPECT_TRUE(id.ok);
  const auto iso = drift_step_bound_check(designs::rotation2(0.0) * -1.0, s, bs);
  EXPECT_LE(iso.delta, std::log(3.0));
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const auto c = random_case(rng);
    ASSERT_TRUE(drift_step_bound_check(c.g, c.s, c.bs).ok) << i;
  }
}

TEST(Walker, MatchesCocycleSteps) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_case(rng);
    BundleWalker w(c.s, c.bs);
    BundleState s = c.s;
    for (int k = 0; k < 5; ++k) {
      const Matrix& g = (k % 2) ? c.g : c.h;
      s = cocycle_step(g, s, c.bs);
      w.step(c.bs.blocks(g));
    }
    const auto ws = w.state();
    EXPECT_LE((ws.theta - s.theta).norm(), 1e-10);
    EXPECT_LE((ws.t - s.t).norm(), 1e-10 * (1.0 + s.t.norm()));
    EXPECT_NEAR(w.drift(), drift_value(s), 1e-10 * (1.0 + drift_value(s)));
    EXPECT_LE(proj_distance(w.point(), join_state(s, c.bs)), 1e-10);
  }
}

TEST(Walker, ExpandingRunDoesNotOverflow) {
  const auto bs = BlockSystem::leading(2, 1);
  const auto ens = MatrixEnsemble::dirac(m2(std::exp(2.0), 1.0, 0.0, 1.0));
  BundleWalker w(make_state(vec({1}), vec({0})), bs);
  BlockSampler sampler(bs, ens);
  Rng rng(1);
  for (int k = 0; k < 10000; ++k) w.step(sampler.draw(rng));
  EXPECT_NEAR(w.log_t() / 10000, 2.0, 1e-3);
  EXPECT_TRUE(std::isfinite(w.drift()));
  EXPECT_LE(proj_distance(w.point(), proj_normalize(vec({1, 0}))), 1e-12);
}

TEST(Trajectory, StrideAndStart) {
  const auto bs = BlockSystem::leading(2, 1);
  Rng rng(1);
  const auto rows = bundle_trajectory(bs, MatrixEnsemble::dirac(m2(0.5, 1, 0, 1)), make_state(vec({1}), vec({0})), 100, rng, 10);
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows[0].step, 0);
  EXPECT_EQ(rows[10].step, 100);
  // t -> t/2 + 1 converges to 2.
  EXPECT_NEAR(std::exp(rows[10].log_t), 2.0, 1e-12);
}

TEST(FiberContraction, Examples) {
  Rng rng(1);
  const auto bs = BlockSystem::leading(2, 1);
  const auto r = fiber_contraction_rate(bs, MatrixEnsemble::dirac(m2(2, 1, 0, 3)), vec({1}), 1000, 2, rng);
  EXPECT_NEAR(r.value, std::log(2.0) - std::log(3.0), 1e-12);
  Matrix iso = Matrix::Zero(3, 3);
  iso.topLeftCorner(2, 2) = designs::rotation2(0.7);
  iso(2, 2) = -1.0;
  EXPECT_NEAR(fiber_contraction_rate(BlockSystem::leading(3, 2), MatrixEnsemble::dirac(iso), vec({1}), 1000, 2, rng).value,
              0.0, 1e-12);
}

TEST(FiberContraction, DesignedScalarBlocks) {
  // A: E log|a| = -0.2; C: E log|c| = 0.1; rate -0.3.
  std::vector<Matrix> mats;
  const double a[2] = {0.1, -0.5}, c[2] = {0.4, -0.2}, b[2] = {1.0, -1.0};
  for (int i = 0; i < 2; ++i) mats.push_back(m2(std::exp(a[i]), b[i], 0.0, std::exp(c[i])));
  Rng rng(2);
  const auto r = fiber_contraction_rate(BlockSystem::leading(2, 1), MatrixEnsemble::uniform(2, mats), vec({1}), 100000, 20, rng);
  EXPECT_LE(std::abs(r.value + 0.3), 3 * r.std_error + 1e-12);
}

TEST(FiberContraction, SignDichotomy) {
  Rng rng(3);
  auto [con, bsc] = designs::affine_scalar(designs::kContractingLogA);
  const auto rc = fiber_contraction_rate(bsc, con, vec({1}), 100000, 20, rng);
  EXPECT_LT(rc.value, -3 * rc.std_error);
  auto [ex, bse] = designs::affine_scalar(designs::kExpandingLogA);
  EXPECT_GE(fiber_contraction_rate(bse, ex, vec({1}), 100000, 20, rng).value, 0.0);
}
