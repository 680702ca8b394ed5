// fracle: command-line front end for the fractional Lengyel-Epstein toolkit.
#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "fracle/commands.hpp"
#include "fracle/config.hpp"
#include "fracle/verify.hpp"

int main(int argc, char** argv) {
  using namespace fracle;

  CLI::App app{"Fractional Lengyel-Epstein stability analysis and simulation"};
  app.set_version_flag("--version", std::string(FRACLE_VERSION));
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  double from = 0.0, to = 1.0;
  std::size_t steps = 1;

  auto* analyze = app.add_subcommand("analyze", "Linear stability report (report.json)");
  analyze->add_option("--config", config_path, "JSON configuration")->required();
  analyze->add_option("--out", out_dir, "Output directory")->required();

  auto* simulate = app.add_subcommand("simulate", "Run the solver and write snapshots");
  simulate->add_option("--config", config_path, "JSON configuration")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();
  simulate->add_option("--seed", seed, "Override the initial-condition seed");

  auto* sweep = app.add_subcommand("sweep-delta", "Repeat the simulation over a range of orders");
  sweep->add_option("--config", config_path, "JSON configuration")->required();
  sweep->add_option("--from", from, "Smallest order")->required();
  sweep->add_option("--to", to, "Largest order")->required();
  sweep->add_option("--steps", steps, "Number of orders")->required()->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_dir, "Output directory")->required();

  auto* verify = app.add_subcommand("verify", "Run the built-in self-checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitIoError;
  }

  try {
    if (verify->parsed()) return cmd_verify(std::cout);
    const Config config = parse_config_file(config_path);
    if (analyze->parsed()) return cmd_analyze(config, out_dir, std::cerr);
    if (simulate->parsed()) return cmd_simulate(config, out_dir, seed, std::cerr);
    if (sweep->parsed()) {
      return cmd_sweep_delta(config, from, to, steps, out_dir, std::cerr, threads_from_env());
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
  return kExitIoError;
}
