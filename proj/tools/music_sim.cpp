#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "music/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Decentralized optimization simulator (multi-update / single-combination methods)"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run every algorithm in a config and write CSV traces");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", config_path, "Experiment config (JSON)")->required();
  auto* figures = app.add_subcommand("figures", "Reproduce a named figure recipe");
  figures->add_option("config", config_path, "Figure config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : music::cli::kExitValidation;
  }

  if (*run) return music::cli::cmd_run(config_path, std::cout, std::cerr);
  if (*validate) return music::cli::cmd_validate(config_path, std::cout, std::cerr);
  return music::cli::cmd_figures(config_path, std::cout, std::cerr);
}
