#pragma once

// JSON / CSV / gnuplot serialization. Doubles are written with 17
// significant digits so every file round-trips bit-exactly.

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "json.hpp"

#include "projlift/designs.hpp"
#include "projlift/homogeneous.hpp"

namespace projlift {

using Json = nlohmann::ordered_json;

#ifndef PROJLIFT_VERSION
#define PROJLIFT_VERSION "0.1.0"
#endif
inline constexpr const char* kVersion = PROJLIFT_VERSION;

/// %.17g, with inf / nan spelled out.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Ensembles

inline Json matrix_to_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(m(i, j));
  return a;
}

inline Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

/// Accepts a flat row-major array of rows * cols numbers or an array of rows.
inline Matrix matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array()) throw ConfigError("matrix must be an array");
  Matrix m(rows, cols);
  if (!j.empty() && j.front().is_array()) {
    if (static_cast<Eigen::Index>(j.size()) != rows) throw ConfigError("matrix has the wrong number of rows");
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Json& row = j[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
        throw ConfigError("matrix row has the wrong length");
      for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
  }
  if (static_cast<Eigen::Index>(j.size()) != rows * cols) throw ConfigError("matrix has the wrong number of entries");
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[static_cast<std::size_t>(i * cols + c)].get<double>();
  return m;
}

inline Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("vector must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

inline Json ensemble_to_json(const MatrixEnsemble& ens) {
  Json j;
  j["dim"] = ens.dim();
  j["label"] = ens.label();
  Json atoms = Json::array();
  for (const auto& a : ens.atoms()) atoms.push_back({{"weight", a.weight}, {"matrix", matrix_to_json(a.matrix)}});
  j["atoms"] = atoms;
  return j;
}

template <class T>
T param(const Json& p, const char* key, T fallback) {
  if (!p.is_object() || !p.contains(key)) return fallback;
  try {
    return p.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("parameter '") + key + "': " + e.what());
  }
}

struct BuiltEnsemble {
  MatrixEnsemble ensemble;
  std::optional<BlockSystem> block;  // set by builders that carry one
};

inline BuiltEnsemble ensemble_from_json(const Json& j);

/// Builder registry for generated families: {"builder": name, "params": {...}}.
inline BuiltEnsemble build_named(const std::string& name, const Json& p) {
  using namespace designs;
  if (name == "diag") {
    const Vector d = vector_from_json(p.at("diag"));
    return {MatrixEnsemble::dirac(d.asDiagonal().toDenseMatrix(), "diag"), std::nullopt};
  }
  if (name == "dirac") {
    const int dim = param<int>(p, "dim", 0);
    if (dim < 1) throw ConfigError("dirac builder needs dim");
    return {MatrixEnsemble::dirac(matrix_from_json(p.at("matrix"), dim, dim), param<std::string>(p, "label", "dirac")),
            std::nullopt};
  }
  if (name == "scalar-pair") return {scalar_pair(), std::nullopt};
  if (name == "random-gl")
    return {random_gl(param<int>(p, "dim", 3), param<int>(p, "atom_count", 2), param<std::uint64_t>(p, "seed", kWedgeSeed)),
            std::nullopt};
  if (name == "sl2c")
    return {build_sl2c_ensemble(param<int>(p, "atom_count", kDefaultSl2cAtoms), param<std::uint64_t>(p, "seed", kDefaultSl2cSeed)),
            std::nullopt};
  if (name == "sl2c-affine")
    return {build_sl2c_affine_ensemble(param<int>(p, "atom_count", kDefaultSl2cAtoms),
                                       param<std::uint64_t>(p, "seed", kDefaultGrassmannianSeed),
                                       param<double>(p, "translation_scale", 1.0)),
            std::nullopt};
  if (name == "affine-scalar") {
    auto [e, b] = build_affine_embedding(affine_scalar_atoms(param<double>(p, "mean_log_a", kContractingLogA),
                                                             param<double>(p, "spread", 0.3)),
                                         "affine-scalar");
    return {e, b};
  }
  if (name == "affine") {
    // {"dim": d, "atoms": [{"weight", "linear", "translation"}]}
    const int d = param<int>(p, "dim", 0);
    if (d < 1 || !p.contains("atoms")) throw ConfigError("affine builder needs dim and atoms");
    std::vector<AffineAtom> atoms;
    for (const auto& a : p.at("atoms"))
      atoms.push_back({a.at("weight").get<double>(), matrix_from_json(a.at("linear"), d, d), vector_from_json(a.at("translation"))});
    auto [e, b] = build_affine_embedding(atoms, param<std::string>(p, "label", "affine"));
    return {e, b};
  }
  if (name == "proximal-2") return {proximal2(), std::nullopt};
  if (name == "complement-block") return {complement_block(), BlockSystem::leading(4, 2)};
  if (name == "mixed-block") return {mixed_block(), BlockSystem::leading(3, 2)};
  if (name == "transpose-support") return {transpose_support(), std::nullopt};
  if (name == "two-block-floor") return {two_block_floor(), BlockSystem::leading(2, 1)};
  if (name == "two-lines") return {two_lines(), std::nullopt};
  if (name == "transpose") return {transpose_ensemble(ensemble_from_json(p.at("ensemble")).ensemble), std::nullopt};
  if (name == "wedge")
    return {wedge_ensemble(ensemble_from_json(p.at("ensemble")).ensemble, param<int>(p, "k", 2)), std::nullopt};
  throw ConfigError("unknown ensemble builder '" + name + "'");
}

inline BuiltEnsemble ensemble_from_json(const Json& j) {
  try {
    if (j.contains("builder")) return build_named(j.at("builder").get<std::string>(), j.value("params", Json::object()));
    const int dim = j.at("dim").get<int>();
    std::vector<Atom> atoms;
    for (const auto& a : j.at("atoms")) atoms.push_back({a.at("weight").get<double>(), matrix_from_json(a.at("matrix"), dim, dim)});
    return {MatrixEnsemble::finite(dim, std::move(atoms), j.value("label", std::string())), std::nullopt};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("ensemble definition: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("ensemble definition: ") + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Reports

inline Json subspace_to_json(const Subspace& s) {
  Json b = Json::array();
  for (Eigen::Index c = 0; c < s.dim(); ++c) b.push_back(vector_to_json(s.basis().col(c)));
  return {{"dim", s.dim()}, {"basis", b}};
}

inline Json estimate_to_json(const GrowthEstimate& e) {
  return {{"value", e.value}, {"stderr", e.std_error}, {"n", e.horizon}, {"reps", e.repetitions}};
}

inline Json fkh_to_json(const FkhReport& r) {
  Json ex = Json::array(), se = Json::array(), fil = Json::array();
  for (const auto& e : r.exponents) {
    ex.push_back(e.value);
    se.push_back(e.std_error);
  }
  for (const auto& s : r.filtration) fil.push_back(subspace_to_json(s));
  return {{"exponents", ex}, {"stderr", se}, {"filtration", fil}, {"notes", r.method_notes}};
}

inline Json classification_to_json(const LiftClassification& c) {
  Json j;
  j["regime"] = to_string(c.regime);
  j["alpha_bar"] = estimate_to_json(c.alpha_bar);
  j["lambda1_W"] = estimate_to_json(c.lambda1_w);
  j["beta_levels_W"] = c.beta_levels_w;
  j["verdict"] = to_string(c.verdict);
  j["witness"] = c.witness ? subspace_to_json(*c.witness) : Json(nullptr);
  j["notes"] = c.notes;
  return j;
}

inline Json tightness_to_json(const TightnessReport& t) {
  return {{"radius_grid", t.radius_grid},
          {"escape_fraction", t.escape_fraction},
          {"escape_first_third", t.first_third},
          {"escape_last_third", t.last_third},
          {"mean_drift_first_third", t.mean_drift_first},
          {"mean_drift_last_third", t.mean_drift_last},
          {"trend", to_string(t.trend)}};
}

inline Json uniqueness_to_json(const UniquenessReport& u) { return {{"pairwise", u.pairwise}, {"max", u.max}}; }

inline Json grassmannian_to_json(const GrassmannianReport& g) {
  Json j;
  j["k"] = g.k;
  j["V_dim"] = g.v_dim;
  j["W_dim"] = g.w_dim;
  j["tightness"] = tightness_to_json(g.tightness);
  j["uniqueness_probe"] = g.probe ? uniqueness_to_json(*g.probe) : Json(nullptr);
  j["verdict"] = g.verdict;
  j["statement"] = g.statement;
  return j;
}

// ---------------------------------------------------------------------------
// CSV and plot scripts

struct CsvEstimateRow {
  std::string label;
  std::string quantity;
  GrowthEstimate estimate;
  std::uint64_t seed = 0;
};

inline std::string lyapunov_csv(const std::vector<CsvEstimateRow>& rows) {
  std::ostringstream os;
  os << "label,quantity,value,stderr,n,reps,seed\n";
  for (const auto& r : rows)
    os << r.label << ',' << r.quantity << ',' << format_double(r.estimate.value) << ','
       << format_double(r.estimate.std_error) << ',' << r.estimate.horizon << ',' << r.estimate.repetitions << ','
       << r.seed << '\n';
  return os.str();
}

inline std::string trajectory_csv(const std::vector<TrajectoryRow>& rows) {
  std::ostringstream os;
  os << "step,drift_value";
  const Eigen::Index q = rows.empty() ? 0 : rows.front().theta.size();
  for (Eigen::Index i = 0; i < q; ++i) os << ",theta" << i;
  os << ",log_norm_t\n";
  for (const auto& r : rows) {
    os << r.step << ',' << format_double(r.drift);
    for (Eigen::Index i = 0; i < q; ++i) os << ',' << format_double(r.theta(i));
    os << ',' << format_double(r.log_t) << '\n';
  }
  return os.str();
}

inline std::string cloud_csv(const EmpiricalMeasure& m) {
  std::ostringstream os;
  os << "weight";
  for (int i = 0; i < m.ambient_dim(); ++i) os << ",x" << i;
  os << '\n';
  for (std::size_t j = 0; j < m.size(); ++j) {
    os << format_double(m.weight(j));
    for (int i = 0; i < m.ambient_dim(); ++i) os << ',' << format_double(m.point(j)(i));
    os << '\n';
  }
  return os.str();
}

/// Data file for escape curves: one row per radius.
inline std::string escape_dat(const TightnessReport& t) {
  std::ostringstream os;
  os << "# radius escape_fraction first_third last_third\n";
  for (std::size_t i = 0; i < t.radius_grid.size(); ++i)
    os << format_double(t.radius_grid[i]) << ' ' << format_double(t.escape_fraction[i]) << ' '
       << format_double(t.first_third[i]) << ' ' << format_double(t.last_third[i]) << '\n';
  return os.str();
}

inline std::string drift_plot_script(const std::string& trajectory_csv_name, const std::string& escape_dat_name) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set terminal pngcairo size 1000,400\n"
     << "set output 'drift.png'\n"
     << "set multiplot layout 1,2\n"
     << "set xlabel 'step'\nset ylabel 'log(|t|+1)'\n"
     << "plot '" << trajectory_csv_name << "' using 1:2 every ::1 with lines title 'drift'\n"
     << "set datafile separator whitespace\n"
     << "set xlabel 'R'\nset ylabel 'escape fraction'\nset yrange [0:1]\n"
     << "plot '" << escape_dat_name << "' using 1:2 with linespoints title 'all', '' using 1:4 with linespoints title 'last third'\n"
     << "unset multiplot\n";
  return os.str();
}

inline std::string spectrum_dat(const Spectrum& s) {
  std::ostringstream os;
  os << "# index exponent stderr\n";
  for (std::size_t i = 0; i < s.exponents.size(); ++i)
    os << i + 1 << ' ' << format_double(s.exponents[i].value) << ' ' << format_double(s.exponents[i].std_error) << '\n';
  return os.str();
}

inline std::string spectrum_plot_script(const std::string& dat_name) {
  return "set terminal pngcairo size 600,400\nset output 'spectrum.png'\nset xlabel 'index'\n"
         "set ylabel 'exponent'\nplot '" + dat_name + "' using 1:2:(3*$3) with yerrorbars title 'spectrum +- 3 stderr'\n";
}

}  // namespace projlift
