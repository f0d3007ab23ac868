// projlift <command> --config <file> [--seed N] [--out DIR] [--threads K]

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "projlift/runner.hpp"

using namespace projlift;

int main(int argc, char** argv) {
  CLI::App app{"Stationary measures and lifts for random matrix products"};
  app.set_version_flag("--version", std::string(kVersion));
  std::string command, config_path, out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  app.add_option("command", command, "lyapunov | fkh | lift | drift | grassmannian | acceptance")
      ->required()
      ->check(CLI::IsMember(command_names()));
  app.add_option("--config", config_path, "JSON experiment config");
  app.add_option("--seed", seed, "master seed (overrides the config and PROJLIFT_SEED)");
  app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  app.add_option("--threads", threads, "worker threads, 0 = hardware concurrency");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  SeedSources seeds;
  seeds.cli = seed;
  if (const char* env = std::getenv("PROJLIFT_SEED")) seeds.env = std::string(env);

  try {
    ExperimentConfig cfg;
    if (!config_path.empty())
      cfg = load_config(config_path, command, seeds);
    else if (command == "acceptance")
      cfg = parse_config(Json{{"seed", acceptance::kDefaultSeed}}, command, ".", seeds);
    else
      throw ConfigError("--config is required for '" + command + "'");
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    set_thread_count(threads);
    const auto result = run(cfg, std::cout);
    for (const auto& f : result.files) std::cout << "wrote " << cfg.output_dir << '/' << f << '\n';
    return result.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
