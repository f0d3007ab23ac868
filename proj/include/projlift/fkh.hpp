#pragma once

// FKH exponents and filtration: invariant subspaces are found first (orbit
// span closure of cheap seeds), exponents are measured on them second.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "projlift/lyapunov.hpp"

namespace projlift {

struct FkhReport {
  std::vector<GrowthEstimate> exponents;  // beta_1 > ... > beta_k
  std::vector<Subspace> filtration;       // F_1 = V > ... > F_k
  std::string method_notes;

  int levels() const { return static_cast<int>(exponents.size()); }
  double beta(int i) const { return exponents.at(static_cast<std::size_t>(i - 1)).value; }
  /// F_i for 1 <= i <= levels + 1, F_{k+1} = {0}.
  Subspace space(int i) const {
    if (i == levels() + 1) return Subspace::zero(filtration.front().ambient_dim());
    return filtration.at(static_cast<std::size_t>(i - 1));
  }
  double beta_min() const { return exponents.back().value; }
};

/// Smallest subspace containing the seeds and closed under every atom.
inline Subspace find_invariant_subspace(const MatrixEnsemble& ens, const std::vector<Vector>& seeds,
                                        double tol = kRankTol, int max_words = -1) {
  require(ens.is_finite(), "find_invariant_subspace: finite support required");
  require(!seeds.empty(), "find_invariant_subspace: no seeds");
  const int d = ens.dim();
  for (const auto& s : seeds) require(s.size() == d, "find_invariant_subspace: seed has wrong dimension");
  if (max_words < 0) max_words = d + 1;
  Subspace span = rank_span(seeds, tol);
  for (int iter = 0; iter <= max_words; ++iter) {
    if (span.is_zero()) return span;
    std::vector<Vector> gen;
    for (Eigen::Index j = 0; j < span.dim(); ++j) gen.push_back(span.basis().col(j));
    bool closed = true;
    for (const auto& a : ens.atoms()) {
      const Matrix img = a.matrix * span.basis();
      for (Eigen::Index j = 0; j < img.cols(); ++j) {
        const double nrm = img.col(j).norm();
        if (span.residual(img.col(j)).norm() > tol * nrm) closed = false;
        gen.push_back(img.col(j) / nrm);
      }
    }
    if (closed) return span;
    Subspace next = rank_span(gen, tol);
    if (next.dim() == span.dim()) {
      // Rank is stable but the closure test fails: the span is drifting at
      // the tolerance level. Accept only if the rotated span passes.
      span = std::move(next);
      continue;
    }
    span = std::move(next);
  }
  throw NumericalError("find_invariant_subspace: no stabilization within " + std::to_string(max_words) +
                       " iterations");
}

/// Eigenvector seeds of a matrix: real eigenvectors, and (Re, Im) pairs for
/// complex ones.
inline std::vector<std::vector<Vector>> eigen_seeds(const Matrix& g) {
  std::vector<std::vector<Vector>> out;
  Eigen::EigenSolver<Matrix> es(g, true);
  if (es.info() != Eigen::Success) return out;
  const auto vals = es.eigenvalues();
  const auto vecs = es.eigenvectors();
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    const double scale = std::max(1.0, std::abs(vals(i)));
    if (std::abs(vals(i).imag()) <= 1e-12 * scale) {
      Vector v = vecs.col(i).real();
      if (v.norm() > 0.0) out.push_back({v / v.norm()});
    } else if (vals(i).imag() > 0.0) {
      Vector re = vecs.col(i).real();
      Vector im = vecs.col(i).imag();
      std::vector<Vector> pair;
      if (re.norm() > 0.0) pair.push_back(re / re.norm());
      if (im.norm() > 0.0) pair.push_back(im / im.norm());
      if (!pair.empty()) out.push_back(std::move(pair));
    }
  }
  return out;
}

/// The s-dimensional subspace of slowest growth of one sampled L_n, from
/// the inverse product applied in reverse order with orthonormalization.
inline Subspace slow_subspace(const MatrixEnsemble& ens, int s, int n, Rng& rng) {
  const int d = ens.dim();
  require(s >= 1 && s <= d, "slow_subspace: dimension out of range");
  require(n >= 1, "slow_subspace: n must be positive");
  std::vector<Matrix> inverses;
  std::vector<std::size_t> idx;
  std::vector<Matrix> drawn;
  if (ens.is_finite()) {
    for (const auto& a : ens.atoms()) inverses.push_back(a.matrix.inverse());
    idx.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) idx.push_back(ens.sample_index(rng));
  } else {
    for (int k = 0; k < n; ++k) drawn.push_back(ens.sample(rng).inverse());
  }
  Matrix q = random_unit_vector(d * s, rng).reshaped(d, s);
  Matrix work(d, s);
  for (int k = n - 1; k >= 0; --k) {
    const Matrix& inv = ens.is_finite() ? inverses[idx[static_cast<std::size_t>(k)]] : drawn[static_cast<std::size_t>(k)];
    work.noalias() = inv * q;
    Eigen::HouseholderQR<Matrix> qr(work);
    q = qr.householderQ() * Matrix::Identity(d, s);
  }
  return column_span(q, 1e-12);
}

struct FkhOptions {
  double tol = kRankTol;
  int max_word_length = 3;
  int max_words = 256;
  std::vector<int> slow_horizons{100, 1000, 10000};
  /// A candidate sits at a lower level when its exponent is below the
  /// current level by more than merge_sigmas combined standard errors plus
  /// bias_allowance / n (finite-horizon bias of log-norm estimates).
  double merge_sigmas = 4.0;
  double bias_allowance = 10.0;
};

namespace detail {

inline void push_unique(std::vector<Subspace>& list, Subspace s) {
  if (s.is_zero() || s.is_full()) return;
  for (const auto& t : list)
    if (t.dim() == s.dim() && principal_angle_distance(t, s) <= 1e-6) return;
  list.push_back(std::move(s));
}

inline std::vector<Matrix> short_words(const MatrixEnsemble& ens, const FkhOptions& opt, Rng& rng) {
  const auto& atoms = ens.atoms();
  std::vector<Matrix> words;
  std::vector<Matrix> layer;
  for (const auto& a : atoms) layer.push_back(a.matrix);
  words = layer;
  for (int len = 2; len <= opt.max_word_length; ++len) {
    const std::size_t full = layer.size() * atoms.size();
    std::vector<Matrix> next;
    if (words.size() + full <= static_cast<std::size_t>(opt.max_words)) {
      for (const auto& w : layer)
        for (const auto& a : atoms) next.push_back(a.matrix * w);
    } else {
      // Too many words: a seeded random selection of this length.
      std::uniform_int_distribution<std::size_t> pick(0, atoms.size() - 1);
      const std::size_t budget = std::max<std::size_t>(atoms.size(), static_cast<std::size_t>(opt.max_words) / 4);
      for (std::size_t j = 0; j < budget; ++j) {
        Matrix w = atoms[pick(rng)].matrix;
        for (int l = 1; l < len; ++l) w = atoms[pick(rng)].matrix * w;
        next.push_back(std::move(w));
      }
    }
    words.insert(words.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return words;
}

}  // namespace detail

/// Proper invariant subspaces reachable from the seed menu, deduplicated.
inline std::vector<Subspace> invariant_candidates(const MatrixEnsemble& ens, const std::optional<BlockSystem>& hint,
                                                  Rng& rng, const FkhOptions& opt = {}) {
  require(ens.is_finite(), "fkh_estimate: finite support required");
  const int d = ens.dim();
  std::vector<Subspace> out;
  auto close = [&](const std::vector<Vector>& seeds) {
    try {
      detail::push_unique(out, find_invariant_subspace(ens, seeds, opt.tol));
    } catch (const NumericalError&) {
      // A seed whose orbit does not settle carries no information.
    }
  };
  if (hint) {
    require(hint->dim() == d, "fkh_estimate: hint has wrong dimension");
    std::vector<Vector> seeds;
    for (Eigen::Index j = 0; j < hint->invariant().dim(); ++j) seeds.push_back(hint->invariant().basis().col(j));
    if (!seeds.empty()) close(seeds);
  }
  for (const auto& w : detail::short_words(ens, opt, rng))
    for (const auto& seeds : eigen_seeds(w)) close(seeds);
  for (int n : opt.slow_horizons)
    for (int s = 1; s < d; ++s) {
      const Subspace slow = slow_subspace(ens, s, n, rng);
      std::vector<Vector> seeds;
      for (Eigen::Index j = 0; j < slow.dim(); ++j) seeds.push_back(slow.basis().col(j));
      close(seeds);
    }
  // Sums of candidates are invariant too; one round of pairwise sums covers
  // the layered designs shipped with the library.
  const std::size_t base = out.size();
  for (std::size_t i = 0; i < base; ++i)
    for (std::size_t j = i + 1; j < base; ++j) detail::push_unique(out, subspace_sum(out[i], out[j], opt.tol));
  std::stable_sort(out.begin(), out.end(), [](const Subspace& a, const Subspace& b) { return a.dim() < b.dim(); });
  return out;
}

/// Top exponent of the action on an invariant subspace (full space allowed).
inline GrowthEstimate invariant_top_exponent(const MatrixEnsemble& ens, const Subspace& s, int n, int reps, Rng& rng) {
  if (s.is_full()) return top_exponent(ens, n, reps, rng);
  return top_exponent(restrict_to_subspace(ens, s), n, reps, rng);
}

inline FkhReport fkh_estimate(const MatrixEnsemble& ens, const std::optional<BlockSystem>& hint, int n, int reps,
                              Rng& rng, const FkhOptions& opt = {}) {
  require(ens.is_finite(), "fkh_estimate: finite support required");
  require(n >= 1 && reps >= 2, "fkh_estimate: need n >= 1 and reps >= 2");
  const int d = ens.dim();
  const std::uint64_t base = fork_seed(rng);
  Rng cand_rng = make_rng(base, 0);
  const auto candidates = invariant_candidates(ens, hint, cand_rng, opt);

  std::vector<GrowthEstimate> cand_exp;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    Rng r = make_rng(base, 100 + i);
    cand_exp.push_back(invariant_top_exponent(ens, candidates[i], n, reps, r));
  }
  auto below = [&](const GrowthEstimate& c, const GrowthEstimate& level) {
    const double thr = opt.merge_sigmas * combined_error(c, level) + opt.bias_allowance / n;
    return c.value < level.value - thr;
  };

  FkhReport rep;
  Rng full_rng = make_rng(base, 1);
  rep.filtration.push_back(Subspace::full(d));
  rep.exponents.push_back(top_exponent(ens, n, reps, full_rng));
  for (int level = 1; level < d + 1; ++level) {
    const GrowthEstimate& beta = rep.exponents.back();
    const Subspace& current = rep.filtration.back();
    Subspace next = Subspace::zero(d);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!below(cand_exp[i], beta)) continue;
      if (!subspace_contains(current, candidates[i]))
        throw NumericalError("fkh_estimate: inconsistent nesting of invariant subspaces");
      next = subspace_sum(next, candidates[i], opt.tol);
    }
    if (next.is_zero()) break;
    if (next.dim() >= current.dim()) throw NumericalError("fkh_estimate: filtration failed to shrink");
    GrowthEstimate b;
    bool found = false;
    for (std::size_t i = 0; i < candidates.size(); ++i)
      if (candidates[i].dim() == next.dim() && principal_angle_distance(candidates[i], next) <= 1e-6) {
        b = cand_exp[i];
        found = true;
        break;
      }
    if (!found) {
      Rng r = make_rng(base, 10 + static_cast<std::uint64_t>(level));
      b = invariant_top_exponent(ens, next, n, reps, r);
    }
    if (!below(b, beta)) throw NumericalError("fkh_estimate: level did not separate from its parent");
    rep.filtration.push_back(std::move(next));
    rep.exponents.push_back(b);
  }
  rep.method_notes = "orbit-span closure of " + std::to_string(candidates.size()) +
                     " candidate invariant subspaces (eigenvectors of words up to length " +
                     std::to_string(opt.max_word_length) +
                     ", slow singular directions, hint); levels merged within " + std::to_string(opt.merge_sigmas) +
                     " combined stderr";
  return rep;
}

/// F_{r'+1}(mu^t)^perp intersected with F_r(mu), where r' is the largest
/// index with beta_{r'}(mu^t) >= beta_r(mu) (equality up to the merge
/// threshold).
inline Subspace transpose_dual_space(const FkhReport& mu, const FkhReport& mu_t, int r, int n,
                                     const FkhOptions& opt = {}) {
  require(r >= 1 && r <= mu.levels(), "transpose_dual_space: index exceeds the detected filtration length");
  const GrowthEstimate& beta_r = mu.exponents[static_cast<std::size_t>(r - 1)];
  int r_prime = 0;
  for (int i = 1; i <= mu_t.levels(); ++i) {
    const GrowthEstimate& b = mu_t.exponents[static_cast<std::size_t>(i - 1)];
    const double thr = opt.merge_sigmas * combined_error(b, beta_r) + opt.bias_allowance / n;
    if (b.value >= beta_r.value - thr) r_prime = i;
  }
  if (r_prime == 0) throw NumericalError("transpose_dual_space: no transpose level reaches beta_r");
  const Subspace perp = orthogonal_complement(mu_t.space(r_prime + 1));
  return subspace_intersection(perp, mu.space(r), opt.tol);
}

inline Subspace transpose_dual_space(const MatrixEnsemble& ens, int r, int n, int reps, Rng& rng,
                                     const FkhOptions& opt = {}) {
  const FkhReport mu = fkh_estimate(ens, std::nullopt, n, reps, rng, opt);
  const FkhReport mu_t = fkh_estimate(transpose_ensemble(ens), std::nullopt, n, reps, rng, opt);
  return transpose_dual_space(mu, mu_t, r, n, opt);
}

}  // namespace projlift
