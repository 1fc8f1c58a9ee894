#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "decoh/config.hpp"
#include "decoh/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Measurement-induced decoherence in the lattice Schwinger model"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string sweep_sizes;

  for (const auto& name : decoh::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "configuration file (key = value or JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "override the master seed");
    sub->add_option("--sweep-sizes", sweep_sizes, "comma-separated N_A = N_E values");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string name = app.get_subcommands().front()->get_name();
  const auto* sub = app.get_subcommands().front();

  decoh::ExperimentConfig config;
  try {
    config = decoh::parse_config_file(config_path);
    if (sub->count("--seed")) config.seed = seed;
    if (sub->count("--sweep-sizes")) {
      config.sweep.clear();
      std::stringstream ss(sweep_sizes);
      std::string item;
      while (std::getline(ss, item, ',')) config.sweep.push_back(std::stoi(item));
    }
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    const int rc = decoh::run_subcommand(name, config, out_dir, std::cerr);
    if (rc != 0) std::cerr << name << ": checks failed\n";
    return rc;
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return 1;
  }
}
