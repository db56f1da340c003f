#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "serskit/errors.hpp"
#include "serskit/runner.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_override;
  int threads = 0;
  double eta = 0.0;
};

void add_common(CLI::App* cmd, CommonOptions* opts) {
  cmd->add_option("--config", opts->config_path, "run configuration (JSON)")
      ->required();
  cmd->add_option("--out", opts->out_override, "output CSV path override");
  cmd->add_option("--threads", opts->threads, "worker pool size (0: all cores)");
  cmd->add_option("--eta", opts->eta, "override numeric.eta (hartree)");
}

int run_mode(sers::cli::RunMode mode, const CommonOptions& opts) {
  sers::cli::RunConfig config;
  try {
    config = sers::cli::load_run_config(opts.config_path, mode);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (!opts.out_override.empty()) config.output_path = opts.out_override;
  if (opts.threads > 0) config.threads = opts.threads;
  if (opts.eta > 0.0) config.numeric.eta = opts.eta;

  const auto diagnostics = sers::cli::validate(config);
  if (!diagnostics.empty()) {
    for (const auto& d : diagnostics) std::cerr << "invalid: " << d << "\n";
    return 2;
  }

  try {
    const int status = sers::cli::run(config);
    std::cout << "wrote " << config.output_path << "\n";
    return status;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sers-kit: coupled molecule-particle Raman spectra"};
  app.require_subcommand(1);

  const std::vector<std::string> modes = {"classical", "quantum-rpa",
                                          "quantum-dda", "self-energy",
                                          "dda-solve"};
  std::vector<CommonOptions> mode_opts(modes.size());
  for (size_t i = 0; i < modes.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(
        modes[i], "run a " + modes[i] + " frequency sweep");
    add_common(cmd, &mode_opts[i]);
  }

  CommonOptions validate_opts;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "check a configuration without running");
  validate_cmd->add_option("--config", validate_opts.config_path,
                           "run configuration (JSON)")
      ->required();
  std::string validate_mode = "quantum-rpa";
  validate_cmd->add_option("--mode", validate_mode,
                           "mode the config is meant for");

  CLI11_PARSE(app, argc, argv);

  if (validate_cmd->parsed()) {
    try {
      const auto config = sers::cli::load_run_config(
          validate_opts.config_path, sers::cli::parse_mode(validate_mode));
      const auto diagnostics = sers::cli::validate(config);
      for (const auto& d : diagnostics) std::cout << d << "\n";
      return diagnostics.empty() ? 0 : 2;
    } catch (const std::exception& e) {
      std::cout << e.what() << "\n";
      return 2;
    }
  }

  for (size_t i = 0; i < modes.size(); ++i) {
    if (app.get_subcommand(modes[i])->parsed()) {
      return run_mode(sers::cli::parse_mode(modes[i]), mode_opts[i]);
    }
  }
  return 2;
}
