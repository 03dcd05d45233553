// stimem: run the published scenarios and write CSV/JSON outputs.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

#include "stimem/errors.hpp"
#include "stimem/scenarios.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kNumericalExit = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stimulated-emission dynamics: multimode Jaynes-Cummings, optical Bloch and 57Fe rates"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List scenarios");

  std::string scenario, config_file, out_dir;
  std::vector<std::string> assignments;
  std::optional<double> phi;
  auto* run = app.add_subcommand("run", "Run a scenario");
  run->add_option("scenario", scenario, "Scenario name (see `list`)")->required();
  run->add_option("--config", config_file, "INI file with [section] key=value entries")
      ->check(CLI::ExistingFile);
  run->add_option("--set", assignments, "Override a key, e.g. --set integrator.dt=0.005");
  run->add_option("--out", out_dir, "Output directory (default: out/<scenario>)");
  run->add_option("--phi", phi, "Relative phase for scenarios that take one");
  bool show_config = false;
  run->add_flag("--print-config", show_config, "Print the resolved config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  if (*list) {
    for (const auto& s : stimem::list_scenarios())
      std::cout << fmt::format("{:<24} {:<24} {}\n", s.name, s.figure, s.description);
    return 0;
  }

  try {
    const auto& info = stimem::find_scenario(scenario);
    auto config = stimem::default_config(scenario);
    if (!config_file.empty()) config.load_file(config_file);
    for (const auto& a : assignments) config.assign(a);
    if (phi) {
      if (info.phase_key.empty()) throw stimem::ConfigError("--phi", scenario + " takes no phase");
      config.set(info.phase_key, fmt::format("{:.17g}", *phi));
    }
    if (show_config) {
      for (const auto& [k, v] : config.values()) std::cout << k << " = " << v << '\n';
      return 0;
    }
    const std::string dir = out_dir.empty() ? "out/" + scenario : out_dir;
    const auto summary = stimem::run_scenario(scenario, config, dir);
    std::cout << summary.dump(2) << '\n';
    std::cerr << "wrote " << dir << '\n';
    return 0;
  } catch (const stimem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const stimem::ModelError& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return kConfigExit;
  } catch (const stimem::IntegratorError& e) {
    std::cerr << "numerical failure: " << e.what() << " (suggested dt " << e.suggested_dt() << ")\n";
    return kNumericalExit;
  } catch (const stimem::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalExit;
  }
}
