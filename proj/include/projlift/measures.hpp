#pragma once

// Empirical stationary measures, cocycle averages, weak-convergence
// surrogates, and the contracting / expanding / mixed regime classifier.

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "projlift/bundle.hpp"
#include "projlift/fkh.hpp"

namespace projlift {

/// Weighted cloud of points of P^{d-1}, stored column-wise.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;

  /// Columns of coords are unit representatives; weights are normalized.
  EmpiricalMeasure(Matrix coords, std::vector<double> weights) : coords_(std::move(coords)), w_(std::move(weights)) {
    require(coords_.cols() >= 1, "EmpiricalMeasure: empty cloud");
    require(static_cast<Eigen::Index>(w_.size()) == coords_.cols(), "EmpiricalMeasure: weight count mismatch");
    long double total = 0.0L;
    for (double w : w_) {
      require(w > 0.0 && std::isfinite(w), "EmpiricalMeasure: weights must be positive");
      total += w;
    }
    for (double& w : w_) w = static_cast<double>(w / total);
    for (Eigen::Index j = 0; j < coords_.cols(); ++j)
      if (!canonicalize_inplace(coords_.col(j))) throw NumericalError("EmpiricalMeasure: zero or non-finite point");
  }

  static EmpiricalMeasure uniform(Matrix coords) {
    const auto n = static_cast<std::size_t>(coords.cols());
    return EmpiricalMeasure(std::move(coords), std::vector<double>(n, 1.0));
  }

  static EmpiricalMeasure dirac(const ProjPoint& p) { return uniform(Matrix(p.coords())); }

  static EmpiricalMeasure from_points(const std::vector<ProjPoint>& pts, std::vector<double> weights = {}) {
    require(!pts.empty(), "EmpiricalMeasure: empty cloud");
    Matrix c(pts.front().dim(), static_cast<Eigen::Index>(pts.size()));
    for (std::size_t j = 0; j < pts.size(); ++j) {
      require(pts[j].dim() == c.rows(), "EmpiricalMeasure: points of different dimensions");
      c.col(static_cast<Eigen::Index>(j)) = pts[j].coords();
    }
    if (weights.empty()) weights.assign(pts.size(), 1.0);
    return EmpiricalMeasure(std::move(c), std::move(weights));
  }

  int ambient_dim() const { return static_cast<int>(coords_.rows()); }
  std::size_t size() const { return w_.size(); }
  const Matrix& coords() const { return coords_; }
  const std::vector<double>& weights() const { return w_; }
  double weight(std::size_t j) const { return w_[j]; }
  auto point(std::size_t j) const { return coords_.col(static_cast<Eigen::Index>(j)); }

  /// Integral of f(point) against the measure, summed in index order.
  template <class F>
  double integrate(F&& f) const {
    long double acc = 0.0L;
    for (std::size_t j = 0; j < size(); ++j) acc += w_[j] * f(point(j));
    return static_cast<double>(acc);
  }

  /// Mass within proj_distance eps of P(S).
  double mass_near(const Subspace& s, double eps) const {
    require(s.ambient_dim() == ambient_dim(), "mass_near: dimension mismatch");
    return integrate([&](const auto& x) { return s.sine_to(x) <= eps ? 1.0 : 0.0; });
  }

 private:
  Matrix coords_;
  std::vector<double> w_;
};

inline constexpr int kDefaultDictSize = 64;
inline constexpr std::uint64_t kDefaultDictSeed = 0x5EEDD1C7ULL;

/// samples_per_step independent paths x, L_1 x, ..., L_n x; for every i the
/// cloud holds samples_per_step independent copies of L_i x.
inline EmpiricalMeasure cesaro_empirical(const MatrixEnsemble& ens, const ProjPoint& x, int n, int samples_per_step,
                                         Rng& rng) {
  require(n >= 1 && samples_per_step >= 1, "cesaro_empirical: n and samples_per_step must be positive");
  require(x.dim() == ens.dim(), "cesaro_empirical: dimension mismatch");
  const std::uint64_t base = fork_seed(rng);
  const Eigen::Index d = ens.dim();
  Matrix pts(d, static_cast<Eigen::Index>(n) * samples_per_step);
  parallel_for(static_cast<std::size_t>(samples_per_step), [&](std::size_t p) {
    Rng local = make_rng(base, p);
    Vector v = x.coords();
    Vector tmp(d);
    Matrix scratch;
    for (int i = 0; i < n; ++i) {
      tmp.noalias() = ens.sample_into(local, scratch) * v;
      if (!canonicalize_inplace(tmp)) throw NumericalError("cesaro_empirical: degenerate point");
      v = tmp;
      pts.col(static_cast<Eigen::Index>(p) * n + i) = v;
    }
  });
  return EmpiricalMeasure::uniform(std::move(pts));
}

/// Occupation measure of X_i...X_1 x for burn_in < i <= n.
inline EmpiricalMeasure birkhoff_empirical(const MatrixEnsemble& ens, const ProjPoint& x, int n, int burn_in, Rng& rng) {
  require(n > burn_in && burn_in >= 0, "birkhoff_empirical: need n > burn_in >= 0");
  require(x.dim() == ens.dim(), "birkhoff_empirical: dimension mismatch");
  const Eigen::Index d = ens.dim();
  Matrix pts(d, n - burn_in);
  Vector v = x.coords();
  Vector tmp(d);
  Matrix scratch;
  for (int i = 1; i <= n; ++i) {
    tmp.noalias() = ens.sample_into(rng, scratch) * v;
    if (!canonicalize_inplace(tmp)) throw NumericalError("birkhoff_empirical: degenerate point");
    v = tmp;
    if (i > burn_in) pts.col(i - burn_in - 1) = v;
  }
  return EmpiricalMeasure::uniform(std::move(pts));
}

/// Burn-in defaults to n / 10.
inline EmpiricalMeasure birkhoff_empirical(const MatrixEnsemble& ens, const ProjPoint& x, int n, Rng& rng) {
  return birkhoff_empirical(ens, x, n, n / 10, rng);
}

/// Birkhoff cloud of the bundle walk started at s, as points of P(V).
inline EmpiricalMeasure bundle_birkhoff(const BlockSystem& bs, const MatrixEnsemble& ens, const BundleState& s, int n,
                                        int burn_in, Rng& rng) {
  require(n > burn_in && burn_in >= 0, "bundle_birkhoff: need n > burn_in >= 0");
  BlockSampler sampler(bs, ens);
  BundleWalker w(s, bs);
  Matrix pts(bs.dim(), n - burn_in);
  for (int i = 1; i <= n; ++i) {
    w.step(sampler.draw(rng));
    if (i > burn_in) pts.col(i - burn_in - 1) = w.point().coords();
  }
  return EmpiricalMeasure::uniform(std::move(pts));
}

/// mu * m: every point pushed by one independent draw.
inline EmpiricalMeasure push_one_step(const MatrixEnsemble& ens, const EmpiricalMeasure& m, Rng& rng) {
  require(m.ambient_dim() == ens.dim(), "push_one_step: dimension mismatch");
  Matrix pts(m.coords().rows(), m.coords().cols());
  Matrix scratch;
  for (std::size_t j = 0; j < m.size(); ++j)
    pts.col(static_cast<Eigen::Index>(j)) = ens.sample_into(rng, scratch) * m.point(j);
  return EmpiricalMeasure(std::move(pts), m.weights());
}

inline constexpr int kCocycleBatches = 20;

/// Integral of log(|g v| / |v|) over mu x m. Finite support is summed
/// exactly per point; samplers use inner_samples draws per point. The
/// standard error comes from 20 contiguous batches of the cloud, which
/// absorbs the serial correlation of Birkhoff clouds.
inline GrowthEstimate cocycle_average(const MatrixEnsemble& ens, const EmpiricalMeasure& m, int inner_samples,
                                      Rng& rng) {
  require(m.size() >= 1, "cocycle_average: empty measure");
  require(m.ambient_dim() == ens.dim(), "cocycle_average: dimension mismatch");
  require(ens.is_finite() || inner_samples >= 1, "cocycle_average: inner_samples must be positive for samplers");
  const std::size_t npts = m.size();
  std::vector<double> values(npts);
  if (ens.is_finite()) {
    const auto& atoms = ens.atoms();
    parallel_for(npts, [&](std::size_t j) {
      long double acc = 0.0L;
      for (const auto& a : atoms) acc += a.weight * std::log(static_cast<long double>((a.matrix * m.point(j)).norm()));
      values[j] = static_cast<double>(acc);
    });
  } else {
    const std::uint64_t base = fork_seed(rng);
    parallel_for(npts, [&](std::size_t j) {
      Rng local = make_rng(base, j);
      Matrix scratch;
      long double acc = 0.0L;
      for (int s = 0; s < inner_samples; ++s)
        acc += std::log(static_cast<long double>((ens.sample_into(local, scratch) * m.point(j)).norm()));
      values[j] = static_cast<double>(acc / inner_samples);
    });
  }
  long double total = 0.0L;
  for (std::size_t j = 0; j < npts; ++j) total += m.weight(j) * values[j];
  GrowthEstimate e;
  e.value = static_cast<double>(total);
  e.horizon = static_cast<std::int64_t>(npts);
  e.repetitions = 1;
  const std::size_t batches = std::min<std::size_t>(kCocycleBatches, npts);
  if (batches >= 2) {
    std::vector<double> means;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t lo = b * npts / batches, hi = (b + 1) * npts / batches;
      long double s = 0.0L, w = 0.0L;
      for (std::size_t j = lo; j < hi; ++j) {
        s += m.weight(j) * values[j];
        w += m.weight(j);
      }
      means.push_back(static_cast<double>(s / w));
    }
    const GrowthEstimate be = estimate_from_samples(means, 1);
    e.std_error = be.std_error;
    e.repetitions = static_cast<int>(batches);
  }
  return e;
}

struct TestFunction {
  Vector center;
  double radius;
};

namespace detail {

inline double bump(const Eigen::Ref<const Vector>& x, const Vector& c, double r) {
  return std::max(0.0, 1.0 - sine_between(x, c) / r);
}

inline double bump_integral(const EmpiricalMeasure& m, const Vector& c, double r) {
  long double acc = 0.0L;
  for (std::size_t j = 0; j < m.size(); ++j) acc += m.weight(j) * bump(m.point(j), c, r);
  return static_cast<double>(acc);
}

}  // namespace detail

inline constexpr std::array<double, 3> kDictRadii{0.1, 0.3, 0.6};

/// Max over a seeded dictionary of bump functions phi(x) = max(0, 1 -
/// d(x, p) / r) of |int phi dm1 - int phi dm2|. Even entries use uniformly
/// random centers; odd entries use a data-anchored pair of centers (the
/// same quantile index in m1 and in m2) and take the larger of the two
/// differences, which keeps the statistic symmetric.
inline double discrepancy(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2, int dict_size = kDefaultDictSize,
                          std::uint64_t dict_seed = kDefaultDictSeed) {
  require(m1.ambient_dim() == m2.ambient_dim(), "discrepancy: dimension mismatch");
  require(dict_size >= 1, "discrepancy: empty dictionary");
  const int d = m1.ambient_dim();
  Rng rng(derive_seed(dict_seed, static_cast<std::uint64_t>(d)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Entry {
    Vector c1, c2;
    double r;
    bool anchored;
  };
  std::vector<Entry> dict;
  for (int j = 0; j < dict_size; ++j) {
    const double r = kDictRadii[static_cast<std::size_t>(j) % kDictRadii.size()];
    if (j % 2 == 0) {
      dict.push_back({random_unit_vector(d, rng), Vector(), r, false});
    } else {
      const double u = unit(rng);
      const auto i1 = std::min(m1.size() - 1, static_cast<std::size_t>(u * static_cast<double>(m1.size())));
      const auto i2 = std::min(m2.size() - 1, static_cast<std::size_t>(u * static_cast<double>(m2.size())));
      dict.push_back({m1.point(i1), m2.point(i2), r, true});
    }
  }
  std::vector<double> values(dict.size());
  parallel_for(dict.size(), [&](std::size_t j) {
    const Entry& e = dict[j];
    double v = std::abs(detail::bump_integral(m1, e.c1, e.r) - detail::bump_integral(m2, e.c1, e.r));
    if (e.anchored)
      v = std::max(v, std::abs(detail::bump_integral(m1, e.c2, e.r) - detail::bump_integral(m2, e.c2, e.r)));
    values[j] = v;
  });
  return *std::max_element(values.begin(), values.end());
}

enum class Trend { recurrent, escaping, unresolved };

inline std::string to_string(Trend t) {
  switch (t) {
    case Trend::recurrent: return "recurrent";
    case Trend::escaping: return "escaping";
    default: return "unresolved";
  }
}

struct TightnessReport {
  std::vector<double> radius_grid;
  std::vector<double> escape_fraction;  // per radius, over steps 1..n
  std::vector<double> first_third;      // per radius
  std::vector<double> last_third;       // per radius
  double mean_drift_first = 0.0;
  double mean_drift_last = 0.0;
  Trend trend = Trend::unresolved;
  std::vector<double> drift_trace;  // drift after each step

  double escape_at(double r) const {
    for (std::size_t i = 0; i < radius_grid.size(); ++i)
      if (radius_grid[i] == r) return escape_fraction[i];
    throw InvalidArgument("TightnessReport: radius not in grid");
  }
};

/// Escape fractions of the drift function along one bundle trajectory.
/// Trend, judged at the largest radius R*: escaping when the last third
/// stays beyond R* at least 90% of the time and the mean drift increased
/// from the first third; recurrent when the last third is beyond R* at
/// most 10% of the time; unresolved otherwise.
inline TightnessReport tightness_diagnostic(const BlockSystem& bs, const MatrixEnsemble& ens, const BundleState& x,
                                            int n, std::vector<double> radius_grid, Rng& rng) {
  require(n >= 3, "tightness_diagnostic: n must be at least 3");
  require(!radius_grid.empty(), "tightness_diagnostic: empty radius grid");
  TightnessReport rep;
  rep.radius_grid = std::move(radius_grid);
  BlockSampler sampler(bs, ens);
  BundleWalker w(x, bs);
  rep.drift_trace.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    w.step(sampler.draw(rng));
    rep.drift_trace.push_back(w.drift());
  }
  const std::size_t third = static_cast<std::size_t>(n) / 3;
  auto frac = [&](std::size_t lo, std::size_t hi, double r) {
    std::size_t c = 0;
    for (std::size_t i = lo; i < hi; ++i) c += rep.drift_trace[i] > r;
    return static_cast<double>(c) / static_cast<double>(hi - lo);
  };
  auto mean = [&](std::size_t lo, std::size_t hi) {
    long double s = 0.0L;
    for (std::size_t i = lo; i < hi; ++i) s += rep.drift_trace[i];
    return static_cast<double>(s / static_cast<long double>(hi - lo));
  };
  const std::size_t N = rep.drift_trace.size();
  for (double r : rep.radius_grid) {
    rep.escape_fraction.push_back(frac(0, N, r));
    rep.first_third.push_back(frac(0, third, r));
    rep.last_third.push_back(frac(N - third, N, r));
  }
  rep.mean_drift_first = mean(0, third);
  rep.mean_drift_last = mean(N - third, N);
  const auto star = static_cast<std::size_t>(
      std::max_element(rep.radius_grid.begin(), rep.radius_grid.end()) - rep.radius_grid.begin());
  if (rep.last_third[star] >= 0.9 && rep.mean_drift_last > rep.mean_drift_first)
    rep.trend = Trend::escaping;
  else if (rep.last_third[star] <= 0.1)
    rep.trend = Trend::recurrent;
  return rep;
}

struct UniquenessReport {
  std::vector<std::vector<double>> pairwise;
  double max = 0.0;
};

/// Birkhoff clouds of the bundle walk from every start (independent streams,
/// burn-in n / 10) and their pairwise discrepancies.
inline UniquenessReport uniqueness_probe(const BlockSystem& bs, const MatrixEnsemble& ens,
                                         const std::vector<BundleState>& starts, int n, Rng& rng,
                                         int dict_size = kDefaultDictSize, std::uint64_t dict_seed = kDefaultDictSeed) {
  require(starts.size() >= 2, "uniqueness_probe: need at least two starts");
  require(n >= 10, "uniqueness_probe: n too small");
  const std::uint64_t base = fork_seed(rng);
  std::vector<EmpiricalMeasure> clouds(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    Rng local = make_rng(base, i);
    clouds[i] = bundle_birkhoff(bs, ens, starts[i], n, n / 10, local);
  });
  UniquenessReport rep;
  rep.pairwise.assign(starts.size(), std::vector<double>(starts.size(), 0.0));
  for (std::size_t i = 0; i < starts.size(); ++i)
    for (std::size_t j = i + 1; j < starts.size(); ++j) {
      const double v = discrepancy(clouds[i], clouds[j], dict_size, dict_seed);
      rep.pairwise[i][j] = rep.pairwise[j][i] = v;
      rep.max = std::max(rep.max, v);
    }
  return rep;
}

// ---------------------------------------------------------------------------
// Regime classification

enum class Regime { contracting, purely_expanding, mixed, critical_indeterminate };
enum class Verdict { unique_lift_exists, lift_iff_complement, lift_iff_partial_complement, indeterminate };

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::contracting: return "contracting";
    case Regime::purely_expanding: return "purely-expanding";
    case Regime::mixed: return "mixed";
    default: return "critical-indeterminate";
  }
}

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::unique_lift_exists: return "unique-lift-exists";
    case Verdict::lift_iff_complement: return "lift-iff-complement";
    case Verdict::lift_iff_partial_complement: return "lift-iff-partial-complement";
    default: return "indeterminate";
  }
}

struct LiftClassification {
  Regime regime = Regime::critical_indeterminate;
  GrowthEstimate alpha_bar;
  GrowthEstimate lambda1_w;
  std::vector<double> beta_levels_w;
  std::vector<GrowthEstimate> beta_estimates_w;
  Verdict verdict = Verdict::indeterminate;
  std::optional<Subspace> witness;  // ambient coordinates
  int mixed_index = 0;               // j with beta_{j+1} < alpha < beta_j
  std::string notes;
};

struct ClassifyOptions {
  double sigmas = 3.0;
  int inner_samples = 16;  // cocycle average draws per point for samplers
  int slow_horizon = 2000;
  FkhOptions fkh;
};

namespace detail {

/// Ambient basis of the subspace given by coordinates y in the adapted
/// basis restricted to columns [offset, offset + y.rows()).
inline Matrix adapted_to_ambient(const BlockSystem& bs, const Matrix& y, Eigen::Index offset) {
  return bs.adapted_basis().middleCols(offset, y.rows()) * y;
}

/// Search for an invariant W' with W' meet W = T and W' + W = pi^{-1}(span
/// of the base cloud). Returns nothing when no such subspace is found.
inline std::optional<Subspace> complement_witness(const BlockSystem& bs, const MatrixEnsemble& ens,
                                                  const EmpiricalMeasure& base, const Subspace& t_in_w,
                                                  const ClassifyOptions& opt, Rng& rng, std::string& notes) {
  const int r = bs.invariant_dim();
  // Support span of the base measure, in quotient coordinates.
  const Subspace sbar = column_span(base.coords(), kRankTol);
  const auto s = static_cast<int>(sbar.dim());
  // P = W + lift(S-bar), in ambient coordinates.
  Matrix pb(bs.dim(), r + s);
  pb << bs.adapted_basis().leftCols(r), adapted_to_ambient(bs, sbar.basis(), r);
  const Subspace p = column_span(pb, kRankTol);
  const Subspace t_amb = t_in_w.is_zero() ? Subspace::zero(bs.dim())
                                          : column_span(adapted_to_ambient(bs, t_in_w.basis(), 0), kRankTol);
  MatrixEnsemble on_p;
  try {
    on_p = p.is_full() ? ens : restrict_to_subspace(ens, p, 1e-7);
  } catch (const InvalidArgument&) {
    notes += "support span of the base measure is not invariant; ";
    return std::nullopt;
  }
  // Coordinates of T inside P, then the action on P / T.
  const Matrix t_p = p.basis().transpose() * t_amb.basis();
  Matrix lift_basis_p;  // (r + s) x s, coordinates in P
  if (t_amb.is_zero()) {
    lift_basis_p = slow_subspace(on_p, s, opt.slow_horizon, rng).basis();
  } else {
    const BlockSystem tb(Subspace(column_span(t_p, kRankTol).basis()), 1e-7);
    MatrixEnsemble on_pt;
    try {
      on_pt = quotient_ensemble(tb, on_p);
    } catch (const InvalidArgument&) {
      notes += "partial complement search: T is not invariant on P; ";
      return std::nullopt;
    }
    const Matrix y = slow_subspace(on_pt, s, opt.slow_horizon, rng).basis();
    lift_basis_p = tb.complement().basis() * y;
  }
  Matrix wb(bs.dim(), t_amb.dim() + s);
  wb << t_amb.basis(), p.basis() * lift_basis_p;
  const Subspace candidate = column_span(wb, kRankTol);
  if (candidate.dim() != t_amb.dim() + s) {
    notes += "complement candidate has the wrong dimension; ";
    return std::nullopt;
  }
  std::vector<Vector> seeds;
  for (Eigen::Index j = 0; j < candidate.dim(); ++j) seeds.push_back(candidate.basis().col(j));
  Subspace closed;
  try {
    closed = find_invariant_subspace(ens, seeds, opt.fkh.tol);
  } catch (const NumericalError&) {
    notes += "complement candidate closure did not stabilize; ";
    return std::nullopt;
  }
  if (closed.dim() != candidate.dim()) {
    notes += "no invariant complement: orbit closure of the slow directions has dimension " +
             std::to_string(closed.dim()) + "; ";
    return std::nullopt;
  }
  const Subspace meet = subspace_intersection(closed, bs.invariant(), kRankTol);
  if (meet.dim() != t_amb.dim() || (t_amb.dim() > 0 && principal_angle_distance(meet, t_amb) > 1e-6)) {
    notes += "complement candidate meets W outside the prescribed layer; ";
    return std::nullopt;
  }
  return closed;
}

}  // namespace detail

/// Compares alpha(nu-bar) with the FKH levels of W and searches for the
/// (partial) invariant complement the verdict depends on.
inline LiftClassification classify_regime(const BlockSystem& bs, const MatrixEnsemble& ens,
                                          const EmpiricalMeasure& base_measure, int n, int reps, Rng& rng,
                                          const ClassifyOptions& opt = {}) {
  require(base_measure.ambient_dim() == bs.quotient_dim(), "classify_regime: base measure must live on P(V/W)");
  require(bs.invariant_dim() >= 1, "classify_regime: W is trivial");
  LiftClassification out;
  const std::uint64_t base = fork_seed(rng);
  Rng alpha_rng = make_rng(base, 0);
  out.alpha_bar = cocycle_average(quotient_ensemble(bs, ens), base_measure, opt.inner_samples, alpha_rng);

  FkhReport fw;
  try {
    Rng fkh_rng = make_rng(base, 1);
    fw = fkh_estimate(restrict_to_invariant(bs, ens), std::nullopt, n, reps, fkh_rng, opt.fkh);
  } catch (const std::exception& e) {
    out.notes = std::string("FKH estimation on W failed: ") + e.what();
    return out;
  }
  out.lambda1_w = fw.exponents.front();
  out.beta_estimates_w = fw.exponents;
  for (const auto& b : fw.exponents) out.beta_levels_w.push_back(b.value);

  const GrowthEstimate& a = out.alpha_bar;
  auto above = [&](const GrowthEstimate& x, const GrowthEstimate& y) {
    return x.value - y.value > opt.sigmas * combined_error(x, y);
  };
  const int k = fw.levels();
  if (above(a, fw.exponents.front())) {
    out.regime = Regime::contracting;
    out.verdict = Verdict::unique_lift_exists;
    out.notes = "alpha exceeds lambda1(W)";
    return out;
  }
  if (above(fw.exponents.back(), a)) {
    out.regime = Regime::purely_expanding;
    out.verdict = Verdict::lift_iff_complement;
  } else {
    for (int j = 1; j < k; ++j)
      if (above(fw.exponents[static_cast<std::size_t>(j - 1)], a) && above(a, fw.exponents[static_cast<std::size_t>(j)])) {
        out.regime = Regime::mixed;
        out.verdict = Verdict::lift_iff_partial_complement;
        out.mixed_index = j;
      }
    if (out.regime != Regime::mixed) {
      out.notes = "alpha is not separated from an FKH level of W by " + std::to_string(opt.sigmas) +
                  " combined stderr";
      return out;
    }
  }
  // T = F_{j+1}(W) in W coordinates; zero in the purely expanding case.
  const Subspace t_in_w = out.regime == Regime::mixed ? fw.space(out.mixed_index + 1) : Subspace::zero(bs.invariant_dim());
  Rng witness_rng = make_rng(base, 2);
  std::string notes;
  out.witness = detail::complement_witness(bs, ens, base_measure, t_in_w, opt, witness_rng, notes);
  out.notes = notes + (out.witness ? "witness found" : "no witness found");
  return out;
}

}  // namespace projlift
