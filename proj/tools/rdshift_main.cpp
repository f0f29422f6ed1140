// Command-line front end: `run` executes a config and writes its artifacts,
// `validate` checks a config without running it, `list-kinds` enumerates
// the available experiment / environment / initial-data names. The report
// goes to stdout; diagnostics go to stderr; the exit code is nonzero only
// for module or I/O errors (reported nonexistence of a wave is a normal,
// successful outcome).

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rdshift/config.hpp"
#include "rdshift/experiments.hpp"

namespace {

void print_names(const char* head, const std::vector<std::string>& names) {
  std::string line = head;
  for (const auto& n : names) {
    line += ' ';
    line += n;
  }
  std::puts(line.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "rdshift: forced waves and spreading dynamics for reaction-diffusion "
      "equations in time-periodic shifting habitats"};
  app.require_subcommand(1);

  std::string run_path, validate_path;
  CLI::App* cmd_run =
      app.add_subcommand("run", "run an experiment config, write artifacts");
  cmd_run->add_option("config", run_path, "path to the INI config file")
      ->required();
  CLI::App* cmd_validate = app.add_subcommand(
      "validate", "parse and validate a config without running it");
  cmd_validate
      ->add_option("config", validate_path, "path to the INI config file")
      ->required();
  app.add_subcommand("list-kinds",
                     "list experiment, environment, and initial-data kinds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      const rdshift::config::ExperimentConfig cfg =
          rdshift::config::load_config(run_path);
      const rdshift::experiments::RunOutcome out =
          rdshift::experiments::run_experiment(cfg);
      if (!out.report_text.empty()) std::fputs(out.report_text.c_str(), stdout);
      for (const auto& a : out.artifacts)
        std::cerr << "wrote " << a.path << "\n";
      if (out.exit_code != 0) std::cerr << "error: " << out.error << "\n";
      return out.exit_code;
    }
    if (cmd_validate->parsed()) {
      const rdshift::config::ExperimentConfig cfg =
          rdshift::config::load_config(validate_path);
      cfg.validate_paths();
      std::printf("ok: %s experiment\n",
                  rdshift::config::kind_name(cfg.experiment.kind));
      return 0;
    }
    print_names("experiments:",
                rdshift::experiments::experiment_kind_names());
    print_names("environments:",
                rdshift::experiments::environment_kind_names());
    print_names("initial-data:", rdshift::experiments::initial_data_names());
    return 0;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
