// varflow command-line driver: run simulations, convergence studies, the
// invariant-check suite, and mesh diagnostics from a config file.
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "varflow/config.hpp"
#include "varflow/harness.hpp"
#include "varflow/verify.hpp"

namespace {

int cmd_run(const std::string& config_path) {
  const varflow::RunConfig cfg = varflow::RunConfig::load(config_path);
  const varflow::RunSeries series = varflow::run_simulation(cfg, &std::cout);
  if (!series.energy.empty()) {
    double max_drift = 0.0;
    for (double e : series.energy)
      max_drift = std::max(max_drift, std::abs(e / series.energy.front() - 1.0));
    std::cout << "steps: " << series.t.size() - 1 << "  final t: " << series.t.back()
              << "  max |E/E0 - 1|: " << max_drift << "\n";
  }
  std::cout << "outputs written to " << cfg.output_dir << "\n";
  return 0;
}

int cmd_convergence(const std::string& config_path) {
  const varflow::RunConfig cfg = varflow::RunConfig::load(config_path);
  (void)varflow::convergence_study(cfg, &std::cout);
  std::cout << "errors.csv written to " << cfg.output_dir << "\n";
  return 0;
}

int cmd_mesh_info(const std::string& config_path) {
  const varflow::RunConfig cfg = varflow::RunConfig::load(config_path);
  varflow::mesh_info(cfg, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"varflow: variational finite-element solver for compressible flow"};
  app.require_subcommand(1);

  std::string run_config, conv_config, info_config, filter;

  CLI::App* run = app.add_subcommand("run", "Run a simulation and write outputs");
  run->add_option("--config", run_config, "Config file")->required()->check(CLI::ExistingFile);

  CLI::App* conv = app.add_subcommand("convergence", "Run the configured convergence study");
  conv->add_option("--config", conv_config, "Config file")->required()->check(CLI::ExistingFile);

  CLI::App* verify = app.add_subcommand("verify", "Run the invariant-check suite");
  verify->add_option("--filter", filter, "Only run checks whose name contains this substring");

  CLI::App* info = app.add_subcommand("mesh-info", "Print mesh statistics for a config");
  info->add_option("--config", info_config, "Config file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_config);
    if (conv->parsed()) return cmd_convergence(conv_config);
    if (verify->parsed()) return varflow::run_verify(filter, std::cout) == 0 ? 0 : 1;
    if (info->parsed()) return cmd_mesh_info(info_config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
