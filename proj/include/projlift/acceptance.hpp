#pragma once

// The acceptance suite: one check per criterion, each driven by its own
// stream derived from (seed, criterion id). Reports hold numbers only, so
// reruns can be compared byte for byte; wall-clock budgets are checked by
// the driver and reported separately.

#include <chrono>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "projlift/io.hpp"

namespace projlift::acceptance {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

struct Result {
  int id = 0;
  std::string name;
  bool passed = false;
  Json details;
  double seconds = 0.0;   // not part of the report
  double budget = 0.0;    // seconds
};

struct Criterion {
  int id;
  std::string name;
  double budget;
  std::function<Json(Rng&, bool&)> run;
};

namespace detail {

inline double sigmas(double diff, double se) {
  if (se > 0.0) return std::abs(diff) / se;
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

inline std::mt19937_64 case_rng(Rng& rng) { return Rng(fork_seed(rng)); }

/// Random block-triangular g = Q [[A, B], [0, C]] Q^T with a random
/// orthogonal Q, and a random state with |t| spread over several decades.
struct ChartCase {
  BlockSystem bs;
  Matrix g, h;
  BundleState s;
};

inline Matrix random_orthogonal(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ();
}

inline Matrix random_block_triangular(int d, int r, Rng& rng) {
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

inline ChartCase random_chart_case(Rng& rng) {
  std::uniform_int_distribution<int> dim(2, 5);
  const int d = dim(rng);
  std::uniform_int_distribution<int> inv(1, d - 1);
  const int r = inv(rng);
  const Matrix q = random_orthogonal(d, rng);
  ChartCase c{BlockSystem(q, r, 1e-9), q * random_block_triangular(d, r, rng) * q.transpose(),
              q * random_block_triangular(d, r, rng) * q.transpose(), {}};
  std::uniform_real_distribution<double> logscale(-3.0, 3.0);
  const Vector theta = random_unit_vector(d - r, rng);
  Vector t = random_unit_vector(r, rng) * std::exp(logscale(rng));
  c.s = make_state(theta, t);
  return c;
}

/// Distance between states modulo the joint sign; t compared relative to
/// 1 + |t|.
inline double state_distance(const BundleState& a, const BundleState& b) {
  const double sgn = a.theta.dot(b.theta) < 0.0 ? -1.0 : 1.0;
  const double dt = (a.theta - sgn * b.theta).norm();
  const double dx = (a.t - sgn * b.t).norm() / (1.0 + b.t.norm());
  return std::max(dt, dx);
}

}  // namespace detail

inline std::vector<Criterion> criteria() {
  using namespace designs;
  std::vector<Criterion> c;

  c.push_back({1, "exact-spectrum", 1.0, [](Rng& rng, bool& ok) {
                 const auto s = spectrum(MatrixEnsemble::dirac(diag({3.0, 2.0, 1.0})), 1000, 2, rng);
                 const double expect[3] = {std::log(3.0), std::log(2.0), 0.0};
                 double err = 0.0;
                 for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(s.exponents[static_cast<std::size_t>(i)].value - expect[i]));
                 ok = err <= 1e-9;
                 return Json{{"spectrum", s.values()}, {"max_abs_error", err}, {"tolerance", 1e-9}};
               }});

  c.push_back({2, "zero-exponent", 10.0, [](Rng& rng, bool& ok) {
                 const auto e = top_exponent(scalar_pair(), 100000, 20, rng);
                 ok = std::abs(e.value) <= 3.0 * e.std_error;
                 return Json{{"top_exponent", estimate_to_json(e)}, {"sigmas", detail::sigmas(e.value, e.std_error)}};
               }});

  c.push_back({3, "exterior-power", 60.0, [](Rng& rng, bool& ok) {
                 const auto ens = random_gl(3, 2, kWedgeSeed);
                 const auto s = spectrum(ens, 100000, 20, rng);
                 const auto w = top_exponent(wedge_ensemble(ens, 2), 100000, 20, rng);
                 const auto sum = s.partial_sum(2);
                 const double se = combined_error(w, sum);
                 ok = std::abs(w.value - sum.value) <= 3.0 * se;
                 return Json{{"top_wedge2", estimate_to_json(w)},
                             {"lambda1_plus_lambda2", estimate_to_json(sum)},
                             {"sigmas", detail::sigmas(w.value - sum.value, se)}};
               }});

  c.push_back({4, "sl2c-spectrum-shape", 120.0, [](Rng& rng, bool& ok) {
                 const auto s = spectrum(build_sl2c_ensemble(kDefaultSl2cAtoms, kDefaultSl2cSeed), 100000, 20, rng);
                 const auto& e = s.exponents;
                 const double s12 = combined_error(e[0], e[1]), s34 = combined_error(e[2], e[3]),
                              s14 = combined_error(e[0], e[3]);
                 const bool a = std::abs(e[0].value - e[1].value) <= 3 * s12;
                 const bool b = std::abs(e[2].value - e[3].value) <= 3 * s34;
                 const bool cc = std::abs(e[0].value + e[3].value) <= 3 * s14;
                 const bool d = e[0].value > 5 * e[0].std_error && e[0].std_error > 0.0;
                 ok = a && b && cc && d;
                 Json ex = Json::array();
                 for (const auto& x : e) ex.push_back(estimate_to_json(x));
                 return Json{{"spectrum", ex},
                             {"l1_minus_l2_sigmas", detail::sigmas(e[0].value - e[1].value, s12)},
                             {"l3_minus_l4_sigmas", detail::sigmas(e[2].value - e[3].value, s34)},
                             {"l1_plus_l4_sigmas", detail::sigmas(e[0].value + e[3].value, s14)},
                             {"l1_over_stderr", e[0].value / e[0].std_error}};
               }});

  c.push_back({5, "fkh-affine", 240.0, [](Rng& rng, bool& ok) {
                 auto [con, bsc] = affine_scalar(kContractingLogA);
                 auto [exp_, bse] = affine_scalar(kExpandingLogA);
                 const auto rc = fkh_estimate(con, bsc, 100000, 20, rng);
                 const auto re = fkh_estimate(exp_, bse, 100000, 20, rng);
                 double angle = 1.0, beta2_sig = std::numeric_limits<double>::infinity();
                 if (rc.levels() == 2) {
                   angle = principal_angle_distance(rc.filtration[1], bsc.invariant());
                   beta2_sig = detail::sigmas(rc.beta(2) - kContractingLogA, rc.exponents[1].std_error);
                 }
                 ok = rc.levels() == 2 && angle <= 1e-6 && beta2_sig <= 3.0 && re.levels() == 1;
                 return Json{{"contracting", fkh_to_json(rc)},
                             {"contracting_F2_angle", angle},
                             {"contracting_beta2_sigmas", beta2_sig},
                             {"expanding", fkh_to_json(re)}};
               }});

  c.push_back({6, "drift-bound", 30.0, [](Rng& rng, bool& ok) {
                 int failures = 0;
                 double worst = -std::numeric_limits<double>::infinity();
                 for (int i = 0; i < 10000; ++i) {
                   const auto cs = detail::random_chart_case(rng);
                   const auto chk = drift_step_bound_check(cs.g, cs.s, cs.bs);
                   failures += !chk.ok;
                   worst = std::max(worst, chk.delta - chk.bound);
                 }
                 ok = failures == 0;
                 return Json{{"cases", 10000}, {"failures", failures}, {"max_delta_minus_bound", worst}};
               }});

  c.push_back({7, "cocycle-laws", 30.0, [](Rng& rng, bool& ok) {
                 double eq = 0.0, comp = 0.0;
                 for (int i = 0; i < 10000; ++i) {
                   const auto cs = detail::random_chart_case(rng);
                   const ProjPoint lhs = join_state(cocycle_step(cs.g, cs.s, cs.bs), cs.bs);
                   const ProjPoint rhs = proj_normalize(cs.g * join_state(cs.s, cs.bs).coords());
                   eq = std::max(eq, proj_distance(lhs, rhs));
                   const BundleState two = cocycle_step(cs.g, cocycle_step(cs.h, cs.s, cs.bs), cs.bs);
                   const BundleState one = cocycle_step(cs.g * cs.h, cs.s, cs.bs);
                   comp = std::max(comp, detail::state_distance(two, one));
                 }
                 ok = eq <= 1e-10 && comp <= 1e-10;
                 return Json{{"cases", 10000}, {"max_equivariance_error", eq}, {"max_composition_error", comp}};
               }});

  c.push_back({8, "contracting-uniqueness", 60.0, [](Rng& rng, bool& ok) {
                 auto [ens, bs] = affine_scalar(kContractingLogA);
                 const Vector one = Vector::Constant(1, 1.0);
                 std::vector<BundleState> starts;
                 for (double t : {0.0, 10.0, -10.0}) starts.push_back(make_state(one, Vector::Constant(1, t)));
                 const auto probe = uniqueness_probe(bs, ens, starts, 100000, rng);
                 const double r = std::log(1e3);
                 double esc = 0.0;
                 Json tj = Json::array();
                 for (const auto& s : starts) {
                   const auto t = tightness_diagnostic(bs, ens, s, 100000, {r}, rng);
                   esc = std::max(esc, t.escape_fraction[0]);
                   tj.push_back(tightness_to_json(t));
                 }
                 ok = probe.max <= 0.05 && esc <= 0.01;
                 return Json{{"probe", uniqueness_to_json(probe)}, {"max_escape_fraction", esc}, {"tightness", tj}};
               }});

  c.push_back({9, "expanding-nonexistence", 60.0, [](Rng& rng, bool& ok) {
                 auto [ens, bs] = affine_scalar(kExpandingLogA);
                 const auto t = tightness_diagnostic(bs, ens, make_state(Vector::Constant(1, 1.0), Vector::Zero(1)),
                                                     10000, {std::log(1e6)}, rng);
                 const auto base = EmpiricalMeasure::dirac(proj_normalize(Vector::Constant(1, 1.0)));
                 const auto cls = classify_regime(bs, ens, base, 100000, 20, rng);
                 ok = t.escape_fraction[0] >= 0.99 && cls.regime == Regime::purely_expanding && !cls.witness;
                 return Json{{"tightness", tightness_to_json(t)}, {"classification", classification_to_json(cls)}};
               }});

  c.push_back({10, "expanding-with-complement", 60.0, [](Rng& rng, bool& ok) {
                 const auto ens = complement_block();
                 const auto bs = BlockSystem::leading(4, 2);
                 const Vector th0 = Vector::Ones(2).normalized();
                 const auto base = birkhoff_empirical(quotient_ensemble(bs, ens), proj_normalize(th0), 20000, rng);
                 const auto cls = classify_regime(bs, ens, base, 20000, 20, rng);
                 const double angle = cls.witness && cls.witness->dim() == 2
                                          ? principal_angle_distance(*cls.witness, complement_block_w_prime())
                                          : 1.0;
                 const auto lift = bundle_birkhoff(bs, ens, make_state(th0, Vector::Zero(2)), 100000, 10000, rng);
                 const double mass = lift.mass_near(complement_block_w_prime(), 1e-3);
                 ok = cls.regime == Regime::purely_expanding && angle <= 1e-6 && mass >= 0.99;
                 return Json{{"classification", classification_to_json(cls)},
                             {"witness_angle", angle},
                             {"lift_mass_near_W_prime", mass}};
               }});

  c.push_back({11, "cocycle-average-preservation", 60.0, [](Rng& rng, bool& ok) {
                 Json out;
                 bool all = true;
                 auto check = [&](const char* name, const MatrixEnsemble& ens, const BlockSystem& bs,
                                  const BundleState& start) {
                   const auto base = EmpiricalMeasure::dirac(proj_normalize(start.theta));
                   const auto ab = cocycle_average(quotient_ensemble(bs, ens), base, 0, rng);
                   const auto lift = bundle_birkhoff(bs, ens, start, 100000, 10000, rng);
                   const auto al = cocycle_average(ens, lift, 0, rng);
                   const double se = combined_error(ab, al);
                   const double sig = detail::sigmas(al.value - ab.value, se);
                   all = all && sig <= 3.0;
                   out[name] = {{"alpha_base", estimate_to_json(ab)}, {"alpha_lift", estimate_to_json(al)}, {"sigmas", sig}};
                 };
                 auto [con, bsc] = affine_scalar(kContractingLogA);
                 check("contracting", con, bsc, make_state(Vector::Constant(1, 1.0), Vector::Zero(1)));
                 // The mixed lift lives on P(W') \ P(F_2(W)), W' = span(e1, e3).
                 check("mixed", mixed_block(), BlockSystem::leading(3, 2),
                       make_state(Vector::Constant(1, 1.0), Vector::Zero(2)));
                 ok = all;
                 return out;
               }});

  c.push_back({12, "uniform-growth-floor", 60.0, [](Rng& rng, bool& ok) {
                 const auto f = uniform_growth_floor_detail(two_block_floor(), 1000, 100, rng);
                 ok = f.value >= -0.25;
                 return Json{{"floor", f.value}, {"argmin", vector_to_json(f.argmin)}, {"beta_min", kTwoBlockBetaMin}};
               }});

  c.push_back({13, "transpose-support", 120.0, [](Rng& rng, bool& ok) {
                 const auto ens = transpose_support();
                 const auto v1 = transpose_dual_space(ens, 1, 20000, 20, rng);
                 const auto cloud = birkhoff_empirical(ens, proj_normalize(Vector::Ones(3)), 100000, rng);
                 const auto alpha = cocycle_average(ens, cloud, 0, rng);
                 const auto top = top_exponent(ens, 100000, 20, rng);
                 const double mass = v1.is_zero() ? 0.0 : cloud.mass_near(v1, 1e-2);
                 const double design_angle =
                     v1.dim() == 2 ? principal_angle_distance(v1, transpose_support_v1()) : 1.0;
                 const double sig = detail::sigmas(alpha.value - top.value, combined_error(alpha, top));
                 ok = mass >= 0.99 && sig <= 3.0;
                 return Json{{"V1", subspace_to_json(v1)},
                             {"V1_angle_to_design", design_angle},
                             {"cloud_alpha", estimate_to_json(alpha)},
                             {"top_exponent", estimate_to_json(top)},
                             {"alpha_vs_top_sigmas", sig},
                             {"mass_near_V1", mass}};
               }});

  c.push_back({14, "grassmannian-dichotomy", 300.0, [](Rng& rng, bool& ok) {
                 const auto ens = build_sl2c_affine_ensemble();
                 Json out = Json::array();
                 bool all = true;
                 for (int k = 0; k <= 3; ++k) {
                   const auto rep = grassmannian_experiment(k, ens, 10000, rng);
                   const double esc = rep.tightness.escape_at(kCalibratedRadius);
                   bool pass;
                   if (k <= 1)
                     pass = rep.verdict == "no-stationary" && esc >= 0.95;
                   else
                     pass = rep.verdict == "unique-stationary" && esc <= 0.05 && rep.probe && rep.probe->max <= 0.05;
                   all = all && pass;
                   out.push_back(grassmannian_to_json(rep));
                 }
                 ok = all;
                 return Json{{"experiments", out}};
               }});

  c.push_back({15, "levi-spectrum", 120.0, [](Rng& rng, bool& ok) {
                 const auto chk = levi_spectrum_check(build_sl2c_affine_ensemble(), 2, 100000, 20, rng);
                 ok = chk.max_gap_sigmas <= 3.0;
                 Json a = Json::array(), b = Json::array();
                 for (const auto& e : chk.spec_mu.exponents) a.push_back(estimate_to_json(e));
                 for (const auto& e : chk.spec_mu_l.exponents) b.push_back(estimate_to_json(e));
                 return Json{{"spec_mu", a}, {"spec_mu_L", b}, {"max_gap", chk.max_gap}, {"max_gap_sigmas", chk.max_gap_sigmas}};
               }});
  return c;
}

/// Runs one criterion with its own stream. Exceptions count as failures.
inline Result run_criterion(const Criterion& c, std::uint64_t seed) {
  Result r;
  r.id = c.id;
  r.name = c.name;
  r.budget = c.budget;
  Rng rng = make_rng(seed, static_cast<std::uint64_t>(c.id));
  const auto t0 = std::chrono::steady_clock::now();
  try {
    bool ok = false;
    r.details = c.run(rng, ok);
    r.passed = ok;
  } catch (const std::exception& e) {
    r.details = {{"error", e.what()}};
    r.passed = false;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline Json result_to_json(const Result& r) {
  return {{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"details", r.details}};
}

struct SuiteOutcome {
  bool passed = true;
  Json report;  // {"criteria": [...]}; no timings
};

/// Runs the chosen criteria (all when ids is empty), printing one
/// PASS/FAIL line each to log, then (if determinism) reruns them at 1 and 4
/// threads and compares the serialized results. Restores the thread count.
inline SuiteOutcome run_suite(std::uint64_t seed, const std::vector<int>& ids, bool determinism, std::ostream& log) {
  const unsigned saved = thread_setting();
  std::vector<Criterion> chosen;
  for (auto& c : criteria())
    if (ids.empty() || std::find(ids.begin(), ids.end(), c.id) != ids.end()) chosen.push_back(std::move(c));

  SuiteOutcome out;
  Json list = Json::array();
  char line[256];
  for (const auto& c : chosen) {
    const Result r = run_criterion(c, seed);
    const bool in_budget = r.seconds <= r.budget;
    const bool pass = r.passed && in_budget;
    out.passed = out.passed && pass;
    std::snprintf(line, sizeof line, "%s  %2d %-30s %8.2fs%s\n", pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                  r.seconds, in_budget ? "" : " (over budget)");
    log << line;
    if (!r.passed) log << "      " << r.details.dump() << '\n';
    log.flush();
    list.push_back(result_to_json(r));
  }

  if (determinism) {
    std::vector<int> mismatched;
    for (const auto& c : chosen) {
      set_thread_count(1);
      const std::string a = result_to_json(run_criterion(c, seed)).dump();
      set_thread_count(4);
      const std::string b = result_to_json(run_criterion(c, seed)).dump();
      if (a != b) mismatched.push_back(c.id);
    }
    set_thread_count(saved);
    const bool same = mismatched.empty();
    out.passed = out.passed && same;
    std::snprintf(line, sizeof line, "%s  16 %-30s\n", same ? "PASS" : "FAIL", "thread-count-determinism");
    log << line;
    if (!same) {
      log << "      mismatched criteria:";
      for (int id : mismatched) log << ' ' << id;
      log << '\n';
    }
    list.push_back(Json{{"id", 16}, {"name", "thread-count-determinism"}, {"passed", same}, {"mismatched", mismatched}});
  }
  out.report = Json{{"seed", seed}, {"passed", out.passed}, {"criteria", list}};
  return out;
}

}  // namespace projlift::acceptance
