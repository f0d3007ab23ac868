#include <gtest/gtest.h>

#include <filesystem>

#include "projlift/runner.hpp"

using namespace projlift;

namespace {

Json parse(const char* text) { return Json::parse(text); }

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST(FormatDouble, RoundTripsAndSpecials) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::log(2.0)}) EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(MatrixJson, FlatRowMajorAndNestedRows) {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(matrix_to_json(m).dump(), "[1.0,2.0,3.0,4.0,5.0,6.0]");
  EXPECT_EQ(matrix_from_json(matrix_to_json(m), 2, 3), m);
  EXPECT_EQ(matrix_from_json(parse("[[1,2,3],[4,5,6]]"), 2, 3), m);
  EXPECT_THROW(matrix_from_json(parse("[1,2,3]"), 2, 3), ConfigError);
  EXPECT_THROW(matrix_from_json(parse("[[1,2],[4,5,6]]"), 2, 3), ConfigError);
  EXPECT_THROW(matrix_from_json(parse("{}"), 2, 3), ConfigError);
}

TEST(EnsembleJson, RoundTripIsBitExact) {
  for (const auto& ens : {designs::random_gl(3, 4, 9), build_sl2c_ensemble(6, kDefaultSl2cSeed), designs::mixed_block()}) {
    const Json j = Json::parse(ensemble_to_json(ens).dump());
    const auto back = ensemble_from_json(j).ensemble;
    ASSERT_EQ(back.atoms().size(), ens.atoms().size());
    EXPECT_EQ(back.label(), ens.label());
    for (std::size_t i = 0; i < ens.atoms().size(); ++i) {
      EXPECT_EQ(back.atoms()[i].matrix, ens.atoms()[i].matrix);
      EXPECT_EQ(back.atoms()[i].weight, ens.atoms()[i].weight);
    }
  }
}

TEST(EnsembleJson, Builders) {
  const char* names[] = {"scalar-pair", "random-gl", "sl2c", "sl2c-affine", "affine-scalar", "proximal-2",
                         "complement-block", "mixed-block", "transpose-support", "two-block-floor", "two-lines"};
  for (const char* n : names) EXPECT_NO_THROW(ensemble_from_json(Json{{"builder", n}})) << n;
  EXPECT_EQ(ensemble_from_json(parse(R"({"builder":"diag","params":{"diag":[2,1]}})")).ensemble.atoms()[0].matrix,
            designs::diag({2, 1}));
  const auto aff = ensemble_from_json(parse(R"({"builder":"affine-scalar","params":{"mean_log_a":0.2}})"));
  ASSERT_TRUE(aff.block.has_value());
  EXPECT_EQ(aff.block->invariant_dim(), 1);
  const auto w = ensemble_from_json(parse(R"({"builder":"wedge","params":{"k":2,"ensemble":{"builder":"sl2c"}}})"));
  EXPECT_EQ(w.ensemble.dim(), 6);
  const auto gen = ensemble_from_json(parse(
      R"({"builder":"affine","params":{"dim":1,"atoms":[{"weight":1,"linear":[0.5],"translation":[3]}]}})"));
  EXPECT_EQ(gen.ensemble.atoms()[0].matrix(0, 1), 3.0);
}

TEST(EnsembleJson, Errors) {
  EXPECT_THROW(ensemble_from_json(Json{{"builder", "nope"}}), ConfigError);
  EXPECT_THROW(ensemble_from_json(parse(R"({"dim":2,"atoms":[{"weight":0.5,"matrix":[1,0,0,1]}]})")), ConfigError);
  EXPECT_THROW(ensemble_from_json(parse(R"({"dim":2,"atoms":[{"weight":1,"matrix":[1,2,2,4]}]})")), ConfigError);
  EXPECT_THROW(ensemble_from_json(parse(R"({"dim":2,"atoms":[{"weight":1,"matrix":[1,0,0]}]})")), ConfigError);
  EXPECT_THROW(ensemble_from_json(parse(R"({"atoms":[]})")), ConfigError);
  EXPECT_THROW(ensemble_from_json(parse(R"({"builder":"random-gl","params":{"dim":"three"}})")), ConfigError);
}

TEST(Csv, Headers) {
  EXPECT_EQ(first_line(lyapunov_csv({})), "label,quantity,value,stderr,n,reps,seed");
  const auto m = EmpiricalMeasure::dirac(proj_normalize(Vector::Unit(3, 1)));
  EXPECT_EQ(cloud_csv(m), "weight,x0,x1,x2\n1,0,1,0\n");
  std::vector<TrajectoryRow> rows(1);
  rows[0].step = 0;
  rows[0].drift = 0.0;
  rows[0].theta = Vector::Ones(2);
  rows[0].log_t = -std::numeric_limits<double>::infinity();
  EXPECT_EQ(trajectory_csv(rows), "step,drift_value,theta0,theta1,log_norm_t\n0,0,1,1,-inf\n");
}

TEST(Config, SeedPriority) {
  const Json raw = parse(R"({"command":"lyapunov","ensemble":{"builder":"scalar-pair"},"seed":5})");
  EXPECT_EQ(parse_config(raw, "", ".", {}).seed, 5u);
  EXPECT_EQ(parse_config(raw, "", ".", {9, std::string("11")}).seed, 9u);
  EXPECT_EQ(parse_config(raw, "", ".", {std::nullopt, std::string("11")}).seed, 5u);
  Json no_seed = raw;
  no_seed.erase("seed");
  EXPECT_EQ(parse_config(no_seed, "", ".", {std::nullopt, std::string("0x10")}).seed, 16u);
  EXPECT_THROW(parse_config(no_seed, "", ".", {}), ConfigError);
  EXPECT_THROW(parse_config(no_seed, "", ".", {std::nullopt, std::string("12abc")}), ConfigError);
}

TEST(Config, Validation) {
  const Json raw = parse(R"({"command":"lyapunov","ensemble":{"builder":"scalar-pair"},"seed":1,"wedge_check":true})");
  const auto cfg = parse_config(raw, "lyapunov", ".", {});
  EXPECT_EQ(cfg.options.value("wedge_check", false), true);
  EXPECT_FALSE(cfg.resolved().contains("threads"));
  EXPECT_THROW(parse_config(raw, "fkh", ".", {}), ConfigError);
  Json bad = raw;
  bad["n"] = 0;
  EXPECT_THROW(parse_config(bad, "", ".", {}), ConfigError);
  bad = raw;
  bad["reps"] = "many";
  EXPECT_THROW(parse_config(bad, "", ".", {}), ConfigError);
  bad = raw;
  bad["command"] = "plot";
  EXPECT_THROW(parse_config(bad, "", ".", {}), ConfigError);
  bad = raw;
  bad.erase("ensemble");
  EXPECT_THROW(parse_config(bad, "", ".", {}), ConfigError);
  bad = raw;
  bad["block"] = Json::object();
  EXPECT_THROW(parse_config(bad, "", ".", {}), ConfigError);
  // grassmannian falls back to the default affine SL2(C) family.
  const auto g = parse_config(parse(R"({"seed":1})"), "grassmannian", ".", {});
  EXPECT_EQ(g.ensemble.at("builder"), "sl2c-affine");
}

TEST(Config, EnsembleFileIsRelativeToConfig) {
  const auto dir = std::filesystem::temp_directory_path() / "projlift_io_test";
  std::filesystem::create_directories(dir / "sub");
  write_text_file((dir / "sub" / "ens.json").string(), R"({"builder":"two-lines"})");
  write_text_file((dir / "cfg.json").string(), R"({"command":"fkh","ensemble":"sub/ens.json","seed":3})");
  const auto cfg = load_config((dir / "cfg.json").string(), "", {});
  EXPECT_EQ(cfg.ensemble.at("builder"), "two-lines");
  write_text_file((dir / "bad.json").string(), R"({"command":"fkh","ensemble":"missing.json","seed":3})");
  EXPECT_THROW(load_config((dir / "bad.json").string(), "", {}), ConfigError);
  write_text_file((dir / "broken.json").string(), "{ not json");
  EXPECT_THROW(load_config((dir / "broken.json").string(), "", {}), ConfigError);
  EXPECT_THROW(load_config((dir / "absent.json").string(), "", {}), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Config, BlockResolution) {
  const auto raw = parse(R"({"command":"drift","ensemble":{"builder":"scalar-pair"},"seed":1,
                             "block":{"invariant_dim":1,"basis":[[0,1,0],[1,0,0],[0,0,1]]}})");
  const auto cfg = parse_config(raw, "", ".", {});
  const auto bs = resolve_block(cfg, {designs::random_gl(3, 2, 1), std::nullopt});
  ASSERT_TRUE(bs.has_value());
  EXPECT_LE(principal_angle_distance(bs->invariant(), Subspace(Matrix(Vector::Unit(3, 1)))), 1e-15);
}
