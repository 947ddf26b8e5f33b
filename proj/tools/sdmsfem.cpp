#include <CLI11.hpp>

#include <iostream>

#include "sdms/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Coupled Stokes-Darcy solver with a multiscale Darcy discretization"};
  app.footer("\n" + sdms::config_help() + "\nSDMSFEM_CACHE_DIR overrides the cache directory (default <out>/cache).\n"
             "Exit codes: 0 success, 2 configuration error, 3 solver did not converge.");
  std::string command, config_path, out;
  int workers = 0;
  app.add_option("command", command, "offline | solve | study | reference")
      ->required()
      ->check(CLI::IsMember({"offline", "solve", "study", "reference"}));
  app.add_option("--config", config_path, "configuration file")->required();
  app.add_option("--workers", workers, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "output directory (overrides the config)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    auto cfg = sdms::parse_config(config_path);
    if (workers > 0) cfg.workers = workers;
    if (!out.empty()) cfg.out = out;
    if (command == "offline") {
      sdms::cmd_offline(cfg, std::cerr);
    } else if (command == "solve") {
      sdms::cmd_solve(cfg, std::cerr);
    } else if (command == "study") {
      const auto rows = sdms::cmd_study(cfg, std::cerr);
      std::cout << sdms::study_table(rows, "study (" + cfg.out + "/study.csv)");
    } else {
      sdms::cmd_reference(cfg, std::cerr);
    }
  } catch (const sdms::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const sdms::ConvergenceError& e) {
    std::cerr << "not converged: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
