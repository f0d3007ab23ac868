#pragma once

// G = L x| u acting on V' = u + R by (l, u).(w, t) = (t u + l w, t), and on
// V = wedge^{k+1} V'. W = wedge^{k+1} u is invariant and the line
// W0 = wedge^{k+1}(u0 + R), u0 = span(e_1..e_k), is not in W. The orbit
// map gH -> g W0 embeds the affine Grassmannian X_{k,d} in P(V) \ P(W).

#include <cmath>
#include <string>
#include <vector>

#include "projlift/measures.hpp"

namespace projlift {

/// Coordinates of V' = u + R: e_0..e_{d-1} span u, e_d is the R direction.
/// Group elements of G are stored as (d+1) x (d+1) matrices [[l, u], [0, 1]].
class HomogeneousSpace {
 public:
  HomogeneousSpace(int u_dim, int k) : d_(u_dim), k_(k) {
    require(u_dim >= 1, "HomogeneousSpace: u_dim must be positive");
    require(k >= 0 && k <= u_dim, "HomogeneousSpace: k out of range");
    const auto subsets = k_subsets(d_ + 1, k_ + 1);
    v_dim_ = static_cast<int>(subsets.size());
    std::vector<int> in_w, out_w;
    for (int i = 0; i < v_dim_; ++i) {
      const auto& s = subsets[static_cast<std::size_t>(i)];
      (s.back() == d_ ? out_w : in_w).push_back(i);
      if (s.back() == d_) {
        bool base = true;
        for (int j = 0; j < k_; ++j) base = base && s[static_cast<std::size_t>(j)] == j;
        if (base) base_index_ = i;
      }
    }
    w_dim_ = static_cast<int>(in_w.size());
    Matrix perm = Matrix::Zero(v_dim_, v_dim_);
    int col = 0;
    for (int i : in_w) perm(i, col++) = 1.0;
    for (int i : out_w) perm(i, col++) = 1.0;
    // Lifted elements have exact zeros in the lower-left block.
    bs_ = BlockSystem(perm, w_dim_, 0.0);
    w_ = Subspace::coordinate(v_dim_, in_w);
    base_ = Vector::Unit(v_dim_, base_index_);
  }

  int u_dim() const { return d_; }
  int k() const { return k_; }
  int v_dim() const { return v_dim_; }
  int w_dim() const { return w_dim_; }
  const Subspace& w_subspace() const { return w_; }
  Subspace base_line() const { return Subspace(Matrix(base_)); }
  const Vector& base_vector() const { return base_; }
  const BlockSystem& block_system() const { return bs_; }

 private:
  int d_;
  int k_;
  int v_dim_ = 0;
  int w_dim_ = 0;
  int base_index_ = -1;
  BlockSystem bs_;
  Subspace w_;
  Vector base_;
};

inline Matrix group_element(const Matrix& l, const Vector& u) {
  require(l.rows() == l.cols() && l.rows() == u.size(), "group element: dimension mismatch");
  if (!is_invertible(l)) throw InvalidArgument("group element: l is singular");
  return affine_matrix(l, u);
}

inline Matrix lift_group_element(const Matrix& g, const HomogeneousSpace& hs) {
  require(g.rows() == hs.u_dim() + 1 && g.cols() == hs.u_dim() + 1, "lift_group_element: dimension mismatch");
  return wedge_power(g, hs.k() + 1);
}

inline Matrix lift_group_element(const Matrix& l, const Vector& u, const HomogeneousSpace& hs) {
  return lift_group_element(group_element(l, u), hs);
}

inline ProjPoint psi_embed(const Matrix& g, const HomogeneousSpace& hs) {
  const Vector v = lift_group_element(g, hs) * hs.base_vector();
  const ProjPoint p = proj_normalize(v);
  if (hs.block_system().quotient_dim() > 0 &&
      !(hs.block_system().to_adapted(p.coords()).tail(hs.block_system().quotient_dim()).norm() > kChartCutoff))
    throw NumericalError("psi_embed: image degenerated onto P(W)");
  return p;
}

inline ProjPoint psi_embed(const Matrix& l, const Vector& u, const HomogeneousSpace& hs) {
  return psi_embed(group_element(l, u), hs);
}

inline MatrixEnsemble lift_ensemble(const MatrixEnsemble& ens_g, const HomogeneousSpace& hs) {
  require(ens_g.dim() == hs.u_dim() + 1, "lift_ensemble: dimension mismatch");
  const int k = hs.k();
  return ens_g.map([k](const Matrix& g) { return wedge_power(g, k + 1); }, hs.v_dim(),
                   "wedge" + std::to_string(k + 1) + "(" + ens_g.label() + ")");
}

/// mu_L: the image of mu under (l, u) -> (l, 0).
inline MatrixEnsemble levi_projection(const MatrixEnsemble& ens_g) {
  const int d = ens_g.dim() - 1;
  return ens_g.map(
      [d](const Matrix& g) {
        Matrix h = g;
        h.topRightCorner(d, 1).setZero();
        return h;
      },
      ens_g.dim(), ens_g.label() + "_L");
}

/// The linear part l of every atom as an ensemble on u.
inline MatrixEnsemble linear_part(const MatrixEnsemble& ens_g) {
  const int d = ens_g.dim() - 1;
  return ens_g.map([d](const Matrix& g) { return Matrix(g.topLeftCorner(d, d)); }, d, ens_g.label() + "|u");
}

inline constexpr std::uint64_t kDefaultGrassmannianSeed = 7;
inline constexpr int kDefaultSl2cAtoms = 6;

/// SL2(C) x| R^4: linear parts from build_sl2c_ensemble's construction,
/// independent standard normal translations. Equal weights.
inline MatrixEnsemble build_sl2c_affine_ensemble(int atom_count = kDefaultSl2cAtoms,
                                                 std::uint64_t seed = kDefaultGrassmannianSeed,
                                                 double translation_scale = 1.0) {
  const auto linear = sl2c_atoms(atom_count, seed);
  Rng rng(derive_seed(seed, 0xAFF1));
  std::normal_distribution<double> normal(0.0, translation_scale);
  std::vector<Matrix> mats;
  for (const auto& c : linear) {
    Vector u(4);
    for (int i = 0; i < 4; ++i) u(i) = normal(rng);
    mats.push_back(affine_matrix(realify(c), u));
  }
  return MatrixEnsemble::uniform(5, mats, "sl2c-affine(" + std::to_string(atom_count) + "," + std::to_string(seed) + ")");
}

inline constexpr double kCalibratedRadius = 13.815510557964274;  // log(1e6)

struct GrassmannianOptions {
  std::vector<double> radius_grid{4.605170185988092, 9.210340371976184, kCalibratedRadius};
  int probe_n = 100000;
  double probe_threshold = 0.05;
  double escape_threshold = 0.05;
};

struct GrassmannianReport {
  int k = 0;
  int v_dim = 0;
  int w_dim = 0;
  TightnessReport tightness;
  std::optional<UniquenessReport> probe;
  std::string verdict;  // no-stationary, unique-stationary, indeterminate
  std::string statement;
};

/// Starts: psi(identity), psi of a pure translation, psi of a random word
/// of length 4 in the support.
inline std::vector<ProjPoint> grassmannian_starts(const MatrixEnsemble& ens_g, const HomogeneousSpace& hs, Rng& rng) {
  const int d = hs.u_dim();
  std::vector<ProjPoint> out;
  out.push_back(psi_embed(Matrix::Identity(d + 1, d + 1), hs));
  Vector u(d);
  for (int i = 0; i < d; ++i) u(i) = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + i);
  out.push_back(psi_embed(Matrix::Identity(d, d), u, hs));
  Matrix w = Matrix::Identity(d + 1, d + 1);
  for (int i = 0; i < 4; ++i) w = ens_g.sample(rng) * w;
  out.push_back(psi_embed(w, hs));
  return out;
}

inline GrassmannianReport grassmannian_experiment(int k, const MatrixEnsemble& ens_g, int n, Rng& rng,
                                                  const GrassmannianOptions& opt = {}) {
  require(ens_g.dim() == 5, "grassmannian_experiment: ensemble must live on SL2(C) x| R^4");
  require(k >= 0 && k <= 3, "grassmannian_experiment: k must be in 0..3");
  const HomogeneousSpace hs(4, k);
  const MatrixEnsemble lifted = lift_ensemble(ens_g, hs);
  const BlockSystem& bs = hs.block_system();
  const std::uint64_t base = fork_seed(rng);
  Rng start_rng = make_rng(base, 0);
  const auto starts = grassmannian_starts(ens_g, hs, start_rng);

  GrassmannianReport rep;
  rep.k = k;
  rep.v_dim = hs.v_dim();
  rep.w_dim = hs.w_dim();
  Rng tight_rng = make_rng(base, 1);
  rep.tightness = tightness_diagnostic(bs, lifted, split_point(starts.front(), bs), n, opt.radius_grid, tight_rng);
  const double esc = rep.tightness.escape_at(*std::max_element(opt.radius_grid.begin(), opt.radius_grid.end()));
  const std::string space = "X_{" + std::to_string(k) + ",4}";
  if (rep.tightness.trend == Trend::escaping) {
    rep.verdict = "no-stationary";
    rep.statement = "consistent with no stationary probability measure on " + space;
  } else if (rep.tightness.trend == Trend::recurrent && esc <= opt.escape_threshold) {
    std::vector<BundleState> states;
    for (const auto& p : starts) states.push_back(split_point(p, bs));
    Rng probe_rng = make_rng(base, 2);
    rep.probe = uniqueness_probe(bs, lifted, states, opt.probe_n, probe_rng);
    if (rep.probe->max <= opt.probe_threshold) {
      rep.verdict = "unique-stationary";
      rep.statement = "consistent with a unique stationary probability measure on " + space;
    } else {
      rep.verdict = "indeterminate";
      rep.statement = "recurrent, but Birkhoff clouds from different starts disagree";
    }
  } else {
    rep.verdict = "indeterminate";
    rep.statement = "tightness trend " + to_string(rep.tightness.trend);
  }
  return rep;
}

struct LeviCheck {
  Spectrum spec_mu;
  Spectrum spec_mu_l;
  double max_gap = 0.0;
  /// max_i |gap_i| / combined stderr_i (0 where both errors vanish and the
  /// gap is zero).
  double max_gap_sigmas = 0.0;
};

/// Spectra of mu and mu_L on wedge^p(u + R). Both runs discard a burn-in
/// (default n/10): the translations leave an O(1) transient in the log
/// stretch of the zero exponents of mu that is absent for mu_L and would
/// otherwise show up as an O(1/n) gap far above the noise.
inline LeviCheck levi_spectrum_check(const MatrixEnsemble& ens_g, int p, int n, int reps, Rng& rng,
                                     int burn_in = -1) {
  require(p >= 1 && p <= ens_g.dim(), "levi_spectrum_check: wedge degree out of range");
  if (burn_in < 0) burn_in = n / 10;
  LeviCheck out;
  out.spec_mu = spectrum(wedge_ensemble(ens_g, p), n, reps, rng, burn_in);
  out.spec_mu_l = spectrum(wedge_ensemble(levi_projection(ens_g), p), n, reps, rng, burn_in);
  for (std::size_t i = 0; i < out.spec_mu.exponents.size(); ++i) {
    const double gap = std::abs(out.spec_mu.exponents[i].value - out.spec_mu_l.exponents[i].value);
    const double se = combined_error(out.spec_mu.exponents[i], out.spec_mu_l.exponents[i]);
    out.max_gap = std::max(out.max_gap, gap);
    const double sig = se > 0.0 ? gap / se : (gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    out.max_gap_sigmas = std::max(out.max_gap_sigmas, sig);
  }
  return out;
}

}  // namespace projlift
