#include <iostream>

#include <CLI11.hpp>

#include "runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dkctl: batch experiments for mean-field particle measures"};
  dk::cli::Options options;
  std::uint64_t seed = 0;
  app.add_option("--config", options.config_path, "Experiment config (JSON)")->required();
  app.add_option("--out", options.out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", options.threads, "Worker threads for path ensembles (0 = all cores)")
      ->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Override sim.master_seed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dk::cli::kConfigError;
  }
  if (seed_opt->count() > 0) options.seed = seed;
  return dk::cli::run(options, std::cout, std::cerr);
}
