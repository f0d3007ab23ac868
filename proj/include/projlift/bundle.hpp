#pragma once

// P(V) \ P(W) as (S(V/W) x W) / {+-1}. A point [xi] with adapted
// coordinates xi = (xi_W, xi_Q) is the pair theta = xi_Q / |xi_Q|,
// t = xi_W / |xi_Q|. An element g = [[A, B], [0, C]] acts by
//   theta -> C theta / |C theta|,   t -> (A t + B theta) / |C theta|.

#include <cmath>
#include <limits>
#include <vector>

#include "projlift/lyapunov.hpp"

namespace projlift {

/// Chart cutoff: points whose quotient component is below this are treated
/// as lying in P(W).
inline constexpr double kChartCutoff = 1e-10;

struct BundleState {
  Vector theta;  // unit vector, dim d - r
  Vector t;      // dim r
};

/// Applies the ProjPoint sign rule to theta and flips t with it.
inline void canonicalize_state(BundleState& s) {
  if (needs_sign_flip(s.theta)) {
    s.theta = -s.theta;
    s.t = -s.t;
  }
}

inline BundleState make_state(const Vector& theta, const Vector& t) {
  const double nrm = theta.norm();
  require(nrm > 0.0 && theta.allFinite() && t.allFinite(), "BundleState: theta must be nonzero and finite");
  BundleState s{theta / nrm, t};
  canonicalize_state(s);
  return s;
}

inline void check_state(const BundleState& s, const BlockSystem& bs) {
  require(s.theta.size() == bs.quotient_dim() && s.t.size() == bs.invariant_dim(),
          "BundleState: dimensions do not match the block system");
  require(std::abs(s.theta.norm() - 1.0) <= 1e-12, "BundleState: theta is not a unit vector");
}

inline BundleState split_point(const ProjPoint& p, const BlockSystem& bs) {
  require(p.dim() == bs.dim(), "split_point: dimension mismatch");
  require(bs.quotient_dim() >= 1, "split_point: quotient is trivial");
  const Vector xi = bs.to_adapted(p.coords());
  const Vector q = xi.tail(bs.quotient_dim());
  const double nq = q.norm();
  if (!(nq > kChartCutoff)) throw InvalidArgument("split_point: point lies in P(W)");
  BundleState s{q / nq, xi.head(bs.invariant_dim()) / nq};
  canonicalize_state(s);
  return s;
}

inline ProjPoint join_state(const BundleState& s, const BlockSystem& bs) {
  check_state(s, bs);
  Vector xi(bs.dim());
  xi << s.t, s.theta;
  return proj_normalize(bs.from_adapted(xi));
}

inline BundleState cocycle_step_blocks(const BlockSystem::Blocks& g, const BundleState& s) {
  const Vector ct = g.c * s.theta;
  const double nc = ct.norm();
  if (!(nc > 1e-300)) throw NumericalError("cocycle_step: C theta vanishes");
  BundleState out{ct / nc, (g.a * s.t + g.b * s.theta) / nc};
  if (!out.theta.allFinite() || !out.t.allFinite()) throw NumericalError("cocycle_step: non-finite state");
  canonicalize_state(out);
  return out;
}

inline BundleState cocycle_step(const Matrix& g, const BundleState& s, const BlockSystem& bs) {
  check_state(s, bs);
  return cocycle_step_blocks(bs.blocks(g), s);
}

/// log(|t| + 1).
inline double drift_value(const BundleState& s) { return std::log1p(s.t.norm()); }

struct DriftCheck {
  double delta = 0.0;
  double bound = 0.0;
  bool ok = false;
};

inline DriftCheck drift_step_bound_check(const Matrix& g, const BundleState& s, const BlockSystem& bs) {
  DriftCheck c;
  c.delta = drift_value(cocycle_step(g, s, bs)) - drift_value(s);
  c.bound = std::log(3.0) + 2.0 * std::log(gauge_n(g));
  c.ok = c.delta <= c.bound + 1e-9;
  return c;
}

/// Bundle trajectory with the fiber coordinate stored as direction and log
/// norm, so expanding runs do not overflow. log_t = -inf encodes t = 0.
class BundleWalker {
 public:
  BundleWalker(const BundleState& s, const BlockSystem& bs) : bs_(&bs), theta_(s.theta) {
    check_state(s, bs);
    const double n = s.t.norm();
    if (n > 0.0) {
      dir_ = s.t / n;
      log_t_ = std::log(n);
    } else {
      dir_ = Vector::Zero(s.t.size());
      log_t_ = -std::numeric_limits<double>::infinity();
    }
  }

  /// Advances by a matrix in the adapted basis, given as its blocks.
  void step(const BlockSystem::Blocks& g) {
    ct_.noalias() = g.c * theta_;
    const double nc = ct_.norm();
    if (!(nc > 1e-300) || !std::isfinite(nc)) throw NumericalError("bundle walk: C theta degenerate");
    bt_.noalias() = g.b * theta_;
    if (log_t_ <= kLinearRegime) {
      // |t| is moderate: work with t itself.
      w_ = bt_;
      if (std::isfinite(log_t_)) w_.noalias() += std::exp(log_t_) * (g.a * dir_);
      const double nw = w_.norm();
      if (nw > 0.0) {
        dir_ = w_ / nw;
        log_t_ = std::log(nw) - std::log(nc);
      } else {
        dir_.setZero();
        log_t_ = -std::numeric_limits<double>::infinity();
      }
    } else {
      w_.noalias() = g.a * dir_;
      w_ += std::exp(-log_t_) * bt_;
      const double nw = w_.norm();
      if (!(nw > 0.0) || !std::isfinite(nw)) throw NumericalError("bundle walk: fiber direction degenerate");
      dir_ = w_ / nw;
      log_t_ += std::log(nw) - std::log(nc);
    }
    theta_ = ct_ / nc;
  }

  /// log(|t| + 1) computed without forming |t|.
  double drift() const {
    if (!std::isfinite(log_t_)) return 0.0;
    return log_t_ > 0.0 ? log_t_ + std::log1p(std::exp(-log_t_)) : std::log1p(std::exp(log_t_));
  }
  double log_t() const { return log_t_; }
  const Vector& theta() const { return theta_; }

  BundleState state() const {
    BundleState s{theta_, std::isfinite(log_t_) ? Vector(std::exp(log_t_) * dir_) : Vector::Zero(dir_.size())};
    canonicalize_state(s);
    return s;
  }

  /// The projective point, stable for any |t|.
  ProjPoint point() const {
    Vector xi(bs_->dim());
    if (log_t_ > 0.0) {
      xi << dir_, std::exp(-log_t_) * theta_;
    } else if (std::isfinite(log_t_)) {
      xi << std::exp(log_t_) * dir_, theta_;
    } else {
      xi << Vector::Zero(dir_.size()), theta_;
    }
    return proj_normalize(bs_->from_adapted(xi));
  }

 private:
  static constexpr double kLinearRegime = 300.0;
  const BlockSystem* bs_;
  Vector theta_;
  Vector dir_;
  double log_t_;
  Vector ct_, bt_, w_;
};

/// Block decomposition of every atom, precomputed for hot loops. Sampler
/// ensembles are decomposed per draw.
class BlockSampler {
 public:
  BlockSampler(const BlockSystem& bs, const MatrixEnsemble& ens) : bs_(&bs), ens_(&ens) {
    require(ens.dim() == bs.dim(), "block sampler: dimension mismatch");
    if (ens.is_finite())
      for (const auto& a : ens.atoms()) blocks_.push_back(bs.blocks(a.matrix));
  }
  const BlockSystem::Blocks& draw(Rng& rng) {
    if (ens_->is_finite()) return blocks_[ens_->sample_index(rng)];
    scratch_ = bs_->blocks(ens_->sample(rng));
    return scratch_;
  }

 private:
  const BlockSystem* bs_;
  const MatrixEnsemble* ens_;
  std::vector<BlockSystem::Blocks> blocks_;
  BlockSystem::Blocks scratch_;
};

struct TrajectoryRow {
  std::int64_t step = 0;
  double drift = 0.0;
  Vector theta;
  double log_t = 0.0;
};

/// Records every stride-th state of a bundle trajectory, step 0 included.
inline std::vector<TrajectoryRow> bundle_trajectory(const BlockSystem& bs, const MatrixEnsemble& ens,
                                                    const BundleState& start, int n, Rng& rng, int stride = 1) {
  require(n >= 0 && stride >= 1, "bundle_trajectory: bad horizon or stride");
  BlockSampler sampler(bs, ens);
  BundleWalker w(start, bs);
  std::vector<TrajectoryRow> rows;
  auto record = [&](int k) {
    const BundleState s = w.state();
    rows.push_back({k, w.drift(), s.theta, w.log_t()});
  };
  record(0);
  for (int k = 1; k <= n; ++k) {
    w.step(sampler.draw(rng));
    if (k % stride == 0) record(k);
  }
  return rows;
}

/// (1/n) log(|A(L_n)| / |C(L_n) theta0|) over independent repetitions.
inline GrowthEstimate fiber_contraction_rate(const BlockSystem& bs, const MatrixEnsemble& ens, const Vector& theta0,
                                             int n, int reps, Rng& rng) {
  require(theta0.size() == bs.quotient_dim() && theta0.norm() > 0.0, "fiber_contraction_rate: bad theta0");
  require(bs.invariant_dim() >= 1, "fiber_contraction_rate: trivial invariant subspace");
  require(n >= 1 && reps >= 1, "fiber_contraction_rate: n and reps must be positive");
  const auto samples = run_repetitions(reps, rng, [&](Rng& local) {
    BlockSampler sampler(bs, ens);
    ProductTrajectory a_prod(bs.invariant_dim());
    Vector th = theta0 / theta0.norm();
    Vector tmp(th.size());
    long double log_c = 0.0L;
    for (int k = 0; k < n; ++k) {
      const auto& g = sampler.draw(local);
      a_prod.push(g.a);
      tmp.noalias() = g.c * th;
      const double nrm = tmp.norm();
      if (!(nrm > 0.0)) throw NumericalError("fiber_contraction_rate: degenerate quotient action");
      log_c += std::log(static_cast<long double>(nrm));
      th = tmp / nrm;
    }
    return (a_prod.log_norm() - static_cast<double>(log_c)) / n;
  });
  return estimate_from_samples(samples, n);
}

}  // namespace projlift
