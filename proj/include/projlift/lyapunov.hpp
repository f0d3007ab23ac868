#pragma once

// Random products L_n = X_n ... X_1 and Lyapunov exponent estimators.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "projlift/ensemble.hpp"
#include "projlift/estimate.hpp"
#include "projlift/parallel.hpp"

namespace projlift {

/// Default horizons for statistical estimates.
inline constexpr int kDefaultHorizon = 100000;
inline constexpr int kDefaultReps = 20;

/// Left random product kept as mantissa * exp(log_scale). The mantissa is
/// rescaled by its largest-magnitude entry after every step.
class ProductTrajectory {
 public:
  explicit ProductTrajectory(int d) : mantissa_(Matrix::Identity(d, d)), buffer_(d, d) {}

  void push(const Matrix& x) {
    buffer_.noalias() = x * mantissa_;
    mantissa_.swap(buffer_);
    const double m = mantissa_.cwiseAbs().maxCoeff();
    if (!(m > 0.0) || !std::isfinite(m)) throw NumericalError("product_trajectory: overflow or degenerate product");
    mantissa_ /= m;
    log_scale_ += std::log(static_cast<long double>(m));
    ++steps_;
  }

  const Matrix& mantissa() const { return mantissa_; }
  long double log_scale() const { return log_scale_; }
  int steps() const { return steps_; }

  /// exp(log_scale) * mantissa; overflows for long horizons, intended for
  /// short products and tests.
  Matrix value() const { return static_cast<double>(std::exp(log_scale_)) * mantissa_; }

  double log_norm() const {
    return static_cast<double>(log_scale_ + std::log(static_cast<long double>(operator_norm(mantissa_))));
  }

 private:
  Matrix mantissa_;
  Matrix buffer_;
  long double log_scale_ = 0.0L;
  int steps_ = 0;
};

struct ScaledMatrix {
  Matrix mantissa;
  long double log_scale = 0.0L;
  Matrix value() const { return static_cast<double>(std::exp(log_scale)) * mantissa; }
};

/// Calls visit(k, trajectory) after each of the n steps.
template <class Visit>
void for_each_product(const MatrixEnsemble& ens, int n, Rng& rng, Visit&& visit) {
  require(n >= 1, "product_trajectory: n must be positive");
  ProductTrajectory traj(ens.dim());
  Matrix scratch;
  for (int k = 1; k <= n; ++k) {
    traj.push(ens.sample_into(rng, scratch));
    visit(k, traj);
  }
}

/// L_1, ..., L_n as scaled matrices.
inline std::vector<ScaledMatrix> product_trajectory(const MatrixEnsemble& ens, int n, Rng& rng) {
  std::vector<ScaledMatrix> out;
  out.reserve(static_cast<std::size_t>(n));
  for_each_product(ens, n, rng, [&](int, const ProductTrajectory& t) { out.push_back({t.mantissa(), t.log_scale()}); });
  return out;
}

/// Runs reps independent repetitions in parallel; rep r uses the stream
/// (base, r) so the aggregate is independent of the thread count.
template <class PerRep>
std::vector<double> run_repetitions(int reps, Rng& rng, PerRep&& per_rep) {
  const std::uint64_t base = fork_seed(rng);
  std::vector<double> out(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    Rng local = make_rng(base, r);
    out[r] = per_rep(local);
  });
  return out;
}

/// Mean over repetitions of (1/n) log |L_n|.
inline GrowthEstimate top_exponent(const MatrixEnsemble& ens, int n, int reps, Rng& rng) {
  require(n >= 1, "top_exponent: n must be positive");
  require(reps >= 2, "top_exponent: need at least two repetitions");
  const auto samples = run_repetitions(reps, rng, [&](Rng& local) {
    ProductTrajectory traj(ens.dim());
    Matrix scratch;
    for (int k = 0; k < n; ++k) traj.push(ens.sample_into(local, scratch));
    return traj.log_norm() / n;
  });
  return estimate_from_samples(samples, n);
}

struct Spectrum {
  /// Nonincreasing Lyapunov exponents with per-entry standard errors.
  std::vector<GrowthEstimate> exponents;
  /// Mean of (1/n) log |det L_n| along the same paths, accumulated
  /// independently from the determinants of the sampled matrices.
  GrowthEstimate log_det;
  /// per_rep[r][i]: exponent i (after sorting) in repetition r.
  std::vector<std::vector<double>> per_rep;

  /// lambda_1 + ... + lambda_k with the error taken across repetitions.
  GrowthEstimate partial_sum(int k) const {
    std::vector<double> sums;
    for (const auto& rep : per_rep) {
      long double s = 0.0L;
      for (int i = 0; i < k; ++i) s += rep.at(static_cast<std::size_t>(i));
      sums.push_back(static_cast<double>(s));
    }
    return estimate_from_samples(sums, exponents.empty() ? 1 : exponents.front().horizon);
  }

  std::vector<double> values() const {
    std::vector<double> v;
    for (const auto& e : exponents) v.push_back(e.value);
    return v;
  }
  double sum() const {
    long double s = 0.0L;
    for (const auto& e : exponents) s += e.value;
    return static_cast<double>(s);
  }
};

namespace detail {

/// One step of the orthonormalization estimator: Q <- orth(X Q), adding
/// log of the diagonal of R to logs. Gram-Schmidt with a second
/// re-orthogonalization pass.
inline void qr_step(const Matrix& x, Matrix& q, Matrix& work, std::vector<long double>& logs) {
  work.noalias() = x * q;
  const Eigen::Index d = work.cols();
  for (Eigen::Index j = 0; j < d; ++j) {
    auto col = work.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < j; ++i) col -= work.col(i).dot(col) * work.col(i);
    const double nrm = col.norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericalError("spectrum: degenerate stretch");
    col /= nrm;
    logs[static_cast<std::size_t>(j)] += std::log(static_cast<long double>(nrm));
  }
  q.swap(work);
}

}  // namespace detail

/// Full Lyapunov spectrum by iterated orthonormalization.
/// burn_in steps advance the frame without being counted; with burn_in > 0
/// the log-determinant is accumulated over the counted steps only.
inline Spectrum spectrum(const MatrixEnsemble& ens, int n, int reps, Rng& rng, int burn_in = 0) {
  require(n >= 1, "spectrum: n must be positive");
  require(burn_in >= 0, "spectrum: burn_in must be nonnegative");
  require(reps >= 1, "spectrum: reps must be positive");
  const int d = ens.dim();
  const std::uint64_t base = fork_seed(rng);
  std::vector<std::vector<double>> per_rep(static_cast<std::size_t>(reps));
  std::vector<double> det_rep(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    Rng local = make_rng(base, r);
    Matrix q = Matrix::Identity(d, d);
    Matrix work(d, d);
    Matrix scratch;
    std::vector<long double> logs(static_cast<std::size_t>(d), 0.0L);
    long double log_det = 0.0L;
    for (int k = 0; k < burn_in; ++k) {
      detail::qr_step(ens.sample_into(local, scratch), q, work, logs);
    }
    std::fill(logs.begin(), logs.end(), 0.0L);
    for (int k = 0; k < n; ++k) {
      const Matrix& x = ens.sample_into(local, scratch);
      log_det += std::log(std::abs(static_cast<long double>(small_determinant(x))));
      detail::qr_step(x, q, work, logs);
    }
    std::vector<double> vals(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) vals[static_cast<std::size_t>(i)] = static_cast<double>(logs[static_cast<std::size_t>(i)] / n);
    per_rep[r] = std::move(vals);
    det_rep[r] = static_cast<double>(log_det / n);
  });
  Spectrum out;
  std::vector<GrowthEstimate> raw;
  for (int i = 0; i < d; ++i) {
    std::vector<double> col(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) col[static_cast<std::size_t>(r)] = per_rep[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)];
    raw.push_back(estimate_from_samples(col, n));
  }
  // The orthonormalization already orders directions by growth; sorting the
  // means only repairs noise-level inversions between close exponents.
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return raw[static_cast<std::size_t>(a)].value > raw[static_cast<std::size_t>(b)].value;
  });
  for (int i : order) out.exponents.push_back(raw[static_cast<std::size_t>(i)]);
  for (const auto& rep : per_rep) {
    std::vector<double> sorted;
    for (int i : order) sorted.push_back(rep[static_cast<std::size_t>(i)]);
    out.per_rep.push_back(std::move(sorted));
  }
  out.log_det = estimate_from_samples(det_rep, n);
  return out;
}

/// (1/n) log(|L_n v| / |v|), accumulated step by step.
inline double vector_growth_once(const MatrixEnsemble& ens, const Vector& v, int n, Rng& rng) {
  Vector w = v / v.norm();
  Vector tmp(w.size());
  Matrix scratch;
  long double acc = 0.0L;
  for (int k = 0; k < n; ++k) {
    tmp.noalias() = ens.sample_into(rng, scratch) * w;
    const double nrm = tmp.norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericalError("vector_growth: degenerate stretch");
    acc += std::log(static_cast<long double>(nrm));
    w = tmp / nrm;
  }
  return static_cast<double>(acc / n);
}

inline GrowthEstimate vector_growth(const MatrixEnsemble& ens, const Vector& v, int n, int reps, Rng& rng) {
  require(v.size() == ens.dim(), "vector_growth: dimension mismatch");
  require(v.norm() > 0.0 && v.allFinite(), "vector_growth: vector must be nonzero and finite");
  require(n >= 1 && reps >= 1, "vector_growth: n and reps must be positive");
  const auto samples = run_repetitions(reps, rng, [&](Rng& local) { return vector_growth_once(ens, v, n, local); });
  return estimate_from_samples(samples, n);
}

struct SubspaceExponents {
  GrowthEstimate lambda1_w;
  GrowthEstimate lambda1_q;
  Spectrum spectrum_w;
  Spectrum spectrum_q;
};

/// Spectra of the actions on W and on V/W.
inline SubspaceExponents subspace_exponents(const BlockSystem& bs, const MatrixEnsemble& ens, int n, int reps, Rng& rng) {
  SubspaceExponents out;
  out.spectrum_w = spectrum(restrict_to_invariant(bs, ens), n, reps, rng);
  out.spectrum_q = spectrum(quotient_ensemble(bs, ens), n, reps, rng);
  out.lambda1_w = out.spectrum_w.exponents.front();
  out.lambda1_q = out.spectrum_q.exponents.front();
  return out;
}

inline Vector random_unit_vector(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(d);
  do {
    for (int i = 0; i < d; ++i) v(i) = normal(rng);
  } while (!(v.norm() > 1e-12));
  return v / v.norm();
}

struct GrowthFloor {
  double value = 0.0;
  Vector argmin;
};

/// Minimum over the standard basis and v_samples random unit vectors of the
/// Monte Carlo mean of (1/n) log(|g v| / |v|) under the n-fold convolution.
/// Each direction is averaged over paths_per_direction independent products.
inline GrowthFloor uniform_growth_floor_detail(const MatrixEnsemble& ens, int n, int v_samples, Rng& rng,
                                               int paths_per_direction = 8) {
  require(n >= 1 && v_samples >= 1, "uniform_growth_floor: n and v_samples must be positive");
  const int d = ens.dim();
  const std::uint64_t base = fork_seed(rng);
  std::vector<Vector> dirs;
  for (int i = 0; i < d; ++i) dirs.push_back(Vector::Unit(d, i));
  Rng dir_rng = make_rng(base, 0xD1);
  for (int s = 0; s < v_samples; ++s) dirs.push_back(random_unit_vector(d, dir_rng));
  std::vector<double> means(dirs.size());
  parallel_for(dirs.size(), [&](std::size_t j) {
    long double acc = 0.0L;
    for (int p = 0; p < paths_per_direction; ++p) {
      Rng local = make_rng(base, 1000 + j * static_cast<std::size_t>(paths_per_direction) + static_cast<std::size_t>(p));
      acc += vector_growth_once(ens, dirs[j], n, local);
    }
    means[j] = static_cast<double>(acc / paths_per_direction);
  });
  const auto it = std::min_element(means.begin(), means.end());
  return {*it, dirs[static_cast<std::size_t>(it - means.begin())]};
}

inline double uniform_growth_floor(const MatrixEnsemble& ens, int n, int v_samples, Rng& rng) {
  return uniform_growth_floor_detail(ens, n, v_samples, rng).value;
}

}  // namespace projlift
