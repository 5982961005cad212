#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include "imsam/experiment.hpp"

namespace {

int execute(imsam::ExperimentConfig cfg, const std::string& out_override, long n_samples_override,
            std::int64_t seed_override) {
  if (!out_override.empty()) cfg.output_dir = out_override;
  if (n_samples_override > 0) cfg.n_samples = n_samples_override;
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);

  const imsam::ResultTable table = imsam::run_sweep(cfg);

  std::filesystem::create_directories(cfg.output_dir);
  const std::string csv_path = cfg.output_dir + "/results.csv";
  imsam::write_csv(table, csv_path);
  std::cout << "wrote " << csv_path << "\n";

  try {
    const std::string svg_path = cfg.output_dir + "/plot.svg";
    imsam::emit_plot(table, svg_path);
    std::cout << "wrote " << svg_path << "\n";
  } catch (const std::exception& e) {
    std::cerr << "plot skipped: " << e.what() << "\n";
  }

  std::cout << imsam::report(table);

  for (const auto& row : table.rows)
    if (!row.ok()) return 2;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted direct samplers: sweeps, quality measurement and figure reproduction"};
  app.require_subcommand(1);

  std::string config_path;
  std::string figure;
  std::string out_dir;
  long n_samples = -1;
  std::int64_t seed = -1;

  auto* run = app.add_subcommand("run", "Run one sweep from a JSON config");
  run->add_option("--config", config_path, "Path to the JSON config")->required();
  run->add_option("--n-samples", n_samples, "Override the sample count");
  run->add_option("--seed", seed, "Override the RNG seed");
  run->add_option("--out", out_dir, "Override the output directory");

  auto* repro = app.add_subcommand("repro", "Reproduce a built-in figure config");
  repro->add_option("figure", figure, "fig1 | fig2 | fig3 | fig4")->required();
  repro->add_option("--n-samples", n_samples, "Override the sample count");
  repro->add_option("--seed", seed, "Override the RNG seed");
  repro->add_option("--out", out_dir, "Override the output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return execute(imsam::load_config_file(config_path), out_dir, n_samples, seed);
    return execute(imsam::builtin_figure_config(figure), out_dir, n_samples, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
