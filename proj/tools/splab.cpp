#include "splab/runner.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>

namespace {

std::string default_output_dir() {
  const char* env = std::getenv("SPLAB_OUTPUT_DIR");
  return env && *env ? env : "splab_out";
}

int run(splab::ScenarioConfig cfg, const std::string& out, int workers, std::int64_t seed) {
  if (!out.empty()) cfg.output_dir = out;
  if (cfg.output_dir.empty()) cfg.output_dir = default_output_dir();
  if (workers > 0) cfg.workers = workers;
  if (seed >= 0) cfg.rng_seed = static_cast<std::uint64_t>(seed);
  cfg.validate();
  return splab::run_scenario(cfg, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial solver and audit runner for coupled Schroedinger-Poisson systems"};
  app.require_subcommand(1);

  std::string config, out;
  int workers = 0;
  std::int64_t seed = -1;

  auto* run_cmd = app.add_subcommand("run", "Run the scenario described by a TOML config");
  run_cmd->add_option("config", config, "Scenario config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out, "Output directory (default: $SPLAB_OUTPUT_DIR or splab_out)");
  run_cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", seed, "RNG seed for randomized audits")->check(CLI::NonNegativeNumber);

  bool all = false;
  auto* audit_cmd = app.add_subcommand("audit", "Run the built-in audit suite");
  audit_cmd->add_flag("--all", all, "Run every audit")->required();
  audit_cmd->add_option("--out", out, "Output directory (default: $SPLAB_OUTPUT_DIR or splab_out)");
  audit_cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  audit_cmd->add_option("--seed", seed, "RNG seed for randomized audits")->check(CLI::NonNegativeNumber);

  app.add_subcommand("version", "Print the version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("version")) {
      std::cout << "splab " << splab::version_string << '\n';
      return 0;
    }
    if (app.got_subcommand("run")) return run(splab::load_config(config), out, workers, seed);
    splab::ScenarioConfig cfg;
    cfg.scenario = splab::Scenario::audit_suite;
    return run(cfg, out, workers, seed);
  } catch (const splab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
