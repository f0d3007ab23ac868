#pragma once

// Experiment configuration and the command runner behind the CLI.
// Reports embed the resolved configuration and the code version; nothing
// depending on wall-clock time or the thread count is written to disk.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "projlift/acceptance.hpp"

namespace projlift {

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"lyapunov", "fkh", "lift", "drift", "grassmannian", "acceptance"};
  return names;
}

struct ExperimentConfig {
  std::string command;
  Json ensemble;               // inline definition, file references resolved
  std::optional<Json> block;   // {"invariant_dim": r} or {"invariant_dim": r, "basis": [[...]]}
  int n = kDefaultHorizon;
  int reps = kDefaultReps;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  Json options = Json::object();  // command-specific keys
  Json raw;                       // as written, for the report

  /// Everything that determines the numbers, in a fixed key order.
  Json resolved() const {
    Json j;
    j["command"] = command;
    j["ensemble"] = ensemble;
    j["block"] = block ? *block : Json(nullptr);
    j["n"] = n;
    j["reps"] = reps;
    j["seed"] = seed;
    j["options"] = options;
    return j;
  }
};

struct SeedSources {
  std::optional<std::uint64_t> cli;
  std::optional<std::string> env;  // PROJLIFT_SEED
};

inline std::uint64_t parse_seed(const std::string& text, const char* where) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(text, &pos, 0);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string(where) + ": not a valid seed: '" + text + "'");
  }
}

namespace detail {

inline const std::vector<std::string>& common_keys() {
  static const std::vector<std::string> keys{"command", "ensemble", "block", "n", "reps", "seed", "output_dir"};
  return keys;
}

inline Json default_ensemble(const std::string& command) {
  if (command == "grassmannian") return Json{{"builder", "sl2c-affine"}};
  return Json(nullptr);
}

/// A string ensemble entry is a path relative to the config file.
inline Json resolve_ensemble(const Json& e, const std::filesystem::path& base_dir, int depth = 0) {
  if (depth > 8) throw ConfigError("ensemble file references nest too deeply");
  if (e.is_string()) {
    std::filesystem::path p = e.get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    if (!std::filesystem::exists(p)) throw ConfigError("ensemble file '" + p.string() + "' does not exist");
    return resolve_ensemble(read_json_file(p.string()), p.parent_path(), depth + 1);
  }
  if (!e.is_object()) throw ConfigError("ensemble must be an object or a file path");
  Json out = e;
  if (out.contains("params") && out["params"].contains("ensemble"))
    out["params"]["ensemble"] = resolve_ensemble(out["params"]["ensemble"], base_dir, depth + 1);
  return out;
}

}  // namespace detail

/// Validates and resolves a parsed config. command_hint (from the command
/// line) wins over a missing "command" key and must agree with a present one.
inline ExperimentConfig parse_config(const Json& raw, const std::string& command_hint,
                                     const std::filesystem::path& base_dir, const SeedSources& seeds) {
  if (!raw.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  cfg.raw = raw;
  try {
    cfg.command = command_hint;
    if (raw.contains("command")) {
      const auto c = raw.at("command").get<std::string>();
      if (!cfg.command.empty() && c != cfg.command)
        throw ConfigError("config is for '" + c + "' but command '" + cfg.command + "' was requested");
      cfg.command = c;
    }
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), cfg.command) == names.end())
      throw ConfigError("unknown command '" + cfg.command + "'");

    if (raw.contains("ensemble"))
      cfg.ensemble = detail::resolve_ensemble(raw.at("ensemble"), base_dir);
    else
      cfg.ensemble = detail::default_ensemble(cfg.command);
    if (cfg.ensemble.is_null() && cfg.command != "acceptance") throw ConfigError("config needs an ensemble");

    if (raw.contains("block")) {
      const auto& b = raw.at("block");
      if (!b.is_object() || !b.contains("invariant_dim")) throw ConfigError("block needs invariant_dim");
      cfg.block = b;
    }
    cfg.n = raw.value("n", cfg.n);
    cfg.reps = raw.value("reps", cfg.reps);
    if (cfg.n < 1) throw ConfigError("n must be at least 1");
    if (cfg.reps < 1) throw ConfigError("reps must be at least 1");
    cfg.output_dir = raw.value("output_dir", cfg.output_dir);

    if (seeds.cli)
      cfg.seed = *seeds.cli;
    else if (raw.contains("seed"))
      cfg.seed = raw.at("seed").get<std::uint64_t>();
    else if (seeds.env)
      cfg.seed = parse_seed(*seeds.env, "PROJLIFT_SEED");
    else
      throw ConfigError("no seed: give --seed, a \"seed\" key, or PROJLIFT_SEED");

    for (const auto& [k, v] : raw.items()) {
      const auto& common = detail::common_keys();
      if (std::find(common.begin(), common.end(), k) == common.end()) cfg.options[k] = v;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path, const std::string& command_hint, const SeedSources& seeds) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file '" + path + "' does not exist");
  return parse_config(read_json_file(path), command_hint, std::filesystem::path(path).parent_path(), seeds);
}

/// Builds the BlockSystem for an ensemble: explicit config block first, then
/// the builder's own.
inline std::optional<BlockSystem> resolve_block(const ExperimentConfig& cfg, const BuiltEnsemble& built) {
  if (!cfg.block) return built.block;
  const int d = built.ensemble.dim();
  const auto& b = *cfg.block;
  try {
    const int r = b.at("invariant_dim").get<int>();
    if (r < 0 || r > d) throw ConfigError("block: invariant_dim out of range");
    if (!b.contains("basis")) return BlockSystem::leading(d, r);
    // Basis columns are given as a list of vectors.
    Matrix basis(d, d);
    const auto& cols = b.at("basis");
    if (!cols.is_array() || static_cast<int>(cols.size()) != d) throw ConfigError("block: basis needs d vectors");
    for (int c = 0; c < d; ++c) basis.col(c) = vector_from_json(cols[static_cast<std::size_t>(c)]);
    return BlockSystem(basis, r, b.value("tol", 1e-9));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("block: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("block: ") + e.what());
  }
}

inline Vector option_vector(const Json& opts, const char* key, const Vector& fallback) {
  if (!opts.contains(key)) return fallback;
  try {
    return vector_from_json(opts.at(key));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("option '") + key + "': " + e.what());
  }
}

inline std::vector<double> option_grid(const Json& opts, const char* key, std::vector<double> fallback) {
  if (!opts.contains(key)) return fallback;
  try {
    auto g = opts.at(key).get<std::vector<double>>();
    if (g.empty()) throw ConfigError(std::string("option '") + key + "' is empty");
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("option '") + key + "': " + e.what());
  }
}

/// Start state from options {"theta": [...], "t": [...]}; defaults are the
/// normalized all-ones direction and t = 0.
inline BundleState option_state(const Json& opts, const BlockSystem& bs) {
  const Vector theta = option_vector(opts, "theta", Vector::Ones(bs.quotient_dim()).normalized());
  const Vector t = option_vector(opts, "t", Vector::Zero(bs.invariant_dim()));
  if (theta.size() != bs.quotient_dim() || t.size() != bs.invariant_dim())
    throw ConfigError("start state dimensions do not match the block system");
  if (!(theta.norm() > 0.0)) throw ConfigError("theta must be nonzero");
  return make_state(theta, t);
}

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> files;  // written, relative to output_dir
};

namespace detail {

class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }
  void write(const std::string& name, const std::string& text) {
    write_text_file((dir_ / name).string(), text);
    files_.push_back(name);
  }
  std::vector<std::string> files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

inline Json report_header(const ExperimentConfig& cfg) {
  return Json{{"version", kVersion}, {"config", cfg.resolved()}};
}

inline BuiltEnsemble build(const ExperimentConfig& cfg) { return ensemble_from_json(cfg.ensemble); }

inline BlockSystem require_block(const ExperimentConfig& cfg, const BuiltEnsemble& b) {
  auto bs = resolve_block(cfg, b);
  if (!bs) throw ConfigError("command '" + cfg.command + "' needs a block (\"block\": {\"invariant_dim\": r})");
  if (bs->dim() != b.ensemble.dim()) throw ConfigError("block dimension does not match the ensemble");
  if (bs->invariant_dim() < 1 || bs->quotient_dim() < 1) throw ConfigError("block must be a proper nonzero subspace");
  if (b.ensemble.is_finite())
    for (const auto& a : b.ensemble.atoms())
      if (!bs->preserves(a.matrix)) throw ConfigError("block is not invariant under the ensemble");
  return *bs;
}

inline RunResult run_lyapunov(const ExperimentConfig& cfg, ArtifactWriter& out) {
  const auto built = build(cfg);
  Rng rng(cfg.seed);
  const int reps = std::max(cfg.reps, 2);
  const auto top = top_exponent(built.ensemble, cfg.n, reps, rng);
  const auto spec = spectrum(built.ensemble, cfg.n, reps, rng);
  Json report = report_header(cfg);
  report["ensemble"] = ensemble_to_json(built.ensemble);
  report["top_exponent"] = estimate_to_json(top);
  Json ex = Json::array();
  for (const auto& e : spec.exponents) ex.push_back(estimate_to_json(e));
  report["spectrum"] = ex;
  report["spectrum_sum"] = spec.sum();
  report["mean_log_det"] = estimate_to_json(spec.log_det);
  if (built.ensemble.dim() >= 2 && cfg.options.value("wedge_check", false)) {
    const auto w = top_exponent(wedge_ensemble(built.ensemble, 2), cfg.n, reps, rng);
    report["top_exponent_wedge2"] = estimate_to_json(w);
  }
  std::vector<CsvEstimateRow> rows{{built.ensemble.label(), "top", top, cfg.seed}};
  for (std::size_t i = 0; i < spec.exponents.size(); ++i)
    rows.push_back({built.ensemble.label(), "lambda" + std::to_string(i + 1), spec.exponents[i], cfg.seed});
  out.write("report.json", dump(report));
  out.write("lyapunov.csv", lyapunov_csv(rows));
  out.write("spectrum.dat", spectrum_dat(spec));
  out.write("spectrum.gp", spectrum_plot_script("spectrum.dat"));
  return {0, out.files()};
}

inline RunResult run_fkh(const ExperimentConfig& cfg, ArtifactWriter& out) {
  const auto built = build(cfg);
  Rng rng(cfg.seed);
  const auto hint = resolve_block(cfg, built);
  const auto rep = fkh_estimate(built.ensemble, hint, cfg.n, std::max(cfg.reps, 2), rng);
  Json report = report_header(cfg);
  report["fkh"] = fkh_to_json(rep);
  report["beta_min"] = rep.beta_min();
  if (cfg.options.contains("transpose_level")) {
    const int r = cfg.options.at("transpose_level").get<int>();
    report["transpose_dual_space"] = subspace_to_json(transpose_dual_space(built.ensemble, r, cfg.n, std::max(cfg.reps, 2), rng));
  }
  out.write("fkh.json", dump(report));
  return {0, out.files()};
}

/// Classifies the lift problem for a base measure given as the Birkhoff
/// cloud of the quotient walk, then samples the lift cloud itself.
inline RunResult run_lift(const ExperimentConfig& cfg, ArtifactWriter& out) {
  const auto built = build(cfg);
  const BlockSystem bs = require_block(cfg, built);
  Rng rng(cfg.seed);
  const BundleState start = option_state(cfg.options, bs);
  const int base_n = cfg.options.value("base_n", cfg.n);
  const std::string base_kind = cfg.options.value("base", std::string("birkhoff"));
  EmpiricalMeasure base;
  if (base_kind == "dirac")
    base = EmpiricalMeasure::dirac(proj_normalize(start.theta));
  else if (base_kind == "birkhoff")
    base = birkhoff_empirical(quotient_ensemble(bs, built.ensemble), proj_normalize(start.theta), base_n, rng);
  else
    throw ConfigError("option 'base' must be \"birkhoff\" or \"dirac\"");
  const auto cls = classify_regime(bs, built.ensemble, base, cfg.n, std::max(cfg.reps, 2), rng);
  const int cloud_n = cfg.options.value("cloud_n", cfg.n);
  const auto cloud = bundle_birkhoff(bs, built.ensemble, start, cloud_n, cloud_n / 10, rng);
  const auto alpha_lift = cocycle_average(built.ensemble, cloud, 0, rng);

  Json report = report_header(cfg);
  report["classification"] = classification_to_json(cls);
  report["lift_cloud"] = {{"size", cloud.size()}, {"alpha", estimate_to_json(alpha_lift)}};
  if (cls.witness) report["lift_cloud"]["mass_near_witness_1e-3"] = cloud.mass_near(*cls.witness, 1e-3);
  out.write("classification.json", dump(report));
  out.write("cloud.csv", cloud_csv(cloud));
  return {cls.verdict == Verdict::indeterminate ? 1 : 0, out.files()};
}

inline RunResult run_drift(const ExperimentConfig& cfg, ArtifactWriter& out) {
  const auto built = build(cfg);
  const BlockSystem bs = require_block(cfg, built);
  Rng rng(cfg.seed);
  const BundleState start = option_state(cfg.options, bs);
  const auto grid = option_grid(cfg.options, "radius_grid", {std::log(1e2), std::log(1e3), std::log(1e6)});
  const int stride = cfg.options.value("stride", std::max(1, cfg.n / 10000));
  if (stride < 1) throw ConfigError("stride must be at least 1");
  if (cfg.n < 3) throw ConfigError("drift needs n >= 3");
  const uint64_t base = fork_seed(rng);
  Rng traj_rng = make_rng(base, 0), tight_rng = make_rng(base, 1);
  const auto rows = bundle_trajectory(bs, built.ensemble, start, cfg.n, traj_rng, stride);
  const auto tight = tightness_diagnostic(bs, built.ensemble, start, cfg.n, grid, tight_rng);
  Json report = report_header(cfg);
  report["tightness"] = tightness_to_json(tight);
  out.write("report.json", dump(report));
  out.write("trajectory.csv", trajectory_csv(rows));
  out.write("escape.dat", escape_dat(tight));
  out.write("drift.gp", drift_plot_script("trajectory.csv", "escape.dat"));
  return {0, out.files()};
}

inline RunResult run_grassmannian(const ExperimentConfig& cfg, ArtifactWriter& out) {
  const auto built = build(cfg);
  Rng rng(cfg.seed);
  const int k = cfg.options.value("k", -1);
  if (k < 0 || k > 3) throw ConfigError("grassmannian needs k in 0..3");
  GrassmannianOptions opt;
  opt.radius_grid = option_grid(cfg.options, "radius_grid", opt.radius_grid);
  opt.probe_n = cfg.options.value("probe_n", opt.probe_n);
  const auto rep = grassmannian_experiment(k, built.ensemble, cfg.n, rng, opt);
  Json report = report_header(cfg);
  report["experiment"] = grassmannian_to_json(rep);
  out.write("report.json", dump(report));
  out.write("escape.dat", escape_dat(rep.tightness));
  return {rep.verdict == "indeterminate" ? 1 : 0, out.files()};
}

inline RunResult run_acceptance(const ExperimentConfig& cfg, ArtifactWriter& out, std::ostream& log) {
  std::vector<int> ids;
  if (cfg.options.contains("criteria")) ids = cfg.options.at("criteria").get<std::vector<int>>();
  const bool determinism = cfg.options.value("determinism", true);
  const auto outcome = acceptance::run_suite(cfg.seed, ids, determinism, log);
  Json report = report_header(cfg);
  report.update(outcome.report);
  out.write("acceptance.json", dump(report));
  return {outcome.passed ? 0 : 1, out.files()};
}

}  // namespace detail

/// Runs a validated config. Throws ConfigError for configuration problems
/// found while building (exit 2); other exceptions are runtime errors.
inline RunResult run(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
  detail::ArtifactWriter out(cfg.output_dir);
  try {
    if (cfg.command == "lyapunov") return detail::run_lyapunov(cfg, out);
    if (cfg.command == "fkh") return detail::run_fkh(cfg, out);
    if (cfg.command == "lift") return detail::run_lift(cfg, out);
    if (cfg.command == "drift") return detail::run_drift(cfg, out);
    if (cfg.command == "grassmannian") return detail::run_grassmannian(cfg, out);
    if (cfg.command == "acceptance") return detail::run_acceptance(cfg, out, log);
  } catch (const nlohmann::json::exception& e) {
    // Options are read lazily; a wrongly typed key surfaces here.
    throw ConfigError(std::string("config option: ") + e.what());
  }
  throw ConfigError("unknown command '" + cfg.command + "'");
}

/// Exit-code mapping shared by the CLI and its tests.
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

}  // namespace projlift
