// k3dyn: run an experiment config, or re-render a plot from its CSV.
//
// Exit codes: 0 success, 2 config error, 3 runtime surface error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "k3dyn/error.hpp"
#include "k3dyn/experiment.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random dynamics on Wehler surfaces and pentagon spaces"};
  std::string config_path, out_dir;
  std::uint64_t seed = 0, trials = 0, steps = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "experiment config (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides the config)");
  auto* trials_opt = app.add_option("--trials", trials, "number of trials (overrides the config)");
  auto* steps_opt = app.add_option("--steps", steps, "steps per trial (overrides n)");
  app.add_flag("--quiet", quiet, "print nothing but errors");

  auto* plot = app.add_subcommand("plot", "render an SVG from a CSV artifact");
  std::string kind, input, output;
  plot->add_option("--kind", kind, "histogram2d | scatter | growth")->required();
  plot->add_option("--input", input, "CSV written by a run")->required();
  plot->add_option("--output", output, "SVG file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  try {
    if (plot->parsed()) {
      k3dyn::cli::write_atomic(output, k3dyn::cli::plot_from_csv(kind, input));
      if (!quiet) std::printf("wrote %s\n", output.c_str());
      return 0;
    }
    if (config_path.empty()) throw k3dyn::ConfigError("--config is required");
    std::vector<std::string> warnings;
    auto cfg = k3dyn::cli::load_config(config_path, warnings);
    if (seed_opt->count()) cfg.seed = seed;
    if (out_opt->count()) cfg.output = out_dir;
    if (trials_opt->count()) {
      if (trials == 0) throw k3dyn::ConfigError("--trials must be positive");
      cfg.trials = trials;
    }
    if (steps_opt->count()) cfg.n = steps;
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    const auto report = k3dyn::cli::run_experiment(cfg, warnings);
    if (!quiet) {
      for (const auto& f : report.files) std::printf("wrote %s\n", f.string().c_str());
      std::printf("%s\n", report.summary.dump(2).c_str());
    }
    return 0;
  } catch (const k3dyn::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const k3dyn::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
}
