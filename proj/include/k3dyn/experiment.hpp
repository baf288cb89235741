#pragma once

// Batch experiments: JSON configs in, JSONL / JSON / CSV / SVG artifacts out.
//
// Config keys (all others are rejected):
//   surface     {"type": "pentagon", "lengths": [5 numbers]} or
//               {"type": "wehler", "coeffs": [27 numbers]} (coeffs optional)
//   generators  {"words": [[int, ...], ...], "weights": [...]}; base
//               involutions are 0-based; default uniform on them
//   subcommand  orbit | lyapunov | cohomology | classify | boundary |
//               stable-dirs | twist | equidist
//   n, trials, seed, output
//   start       optional start state (3 Wehler angles, 5 pentagon angles)
//   word        twist word, applied left to right (default [1, 0])
//   vol_draws   importance-sampling draws for equidist
//   bins        histogram bins per angle

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "k3dyn/randwalk.hpp"

namespace k3dyn::cli {

inline const std::vector<std::string> kSubcommands{"orbit",    "lyapunov",    "cohomology", "classify",
                                                   "boundary", "stable-dirs", "twist",      "equidist"};

struct ExperimentConfig {
  nlohmann::json surface;
  std::vector<std::vector<int>> words;
  std::vector<double> weights;
  std::string subcommand;
  std::uint64_t n = 1000;
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  std::string output = "k3dyn_out";
  std::optional<std::vector<double>> start;
  std::vector<int> word{1, 0};
  std::uint64_t vol_draws = 200000;
  std::uint64_t bins = 64;
};

// Throws ConfigError naming the offending field. Weights that do not sum to
// 1 are rescaled and a warning is appended.
ExperimentConfig parse_config(const nlohmann::json& j, std::vector<std::string>& warnings);
// Reads and parses a file; JSON syntax errors become ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path, std::vector<std::string>& warnings);
// Canonical form: every key present, generators expanded.
nlohmann::json to_json(const ExperimentConfig& c);
// FNV-1a (64 bit, hex) of the canonical form.
std::string config_hash(const ExperimentConfig& c);

// Compact JSON with every float printed as %.17g.
std::string dump17(const nlohmann::json& j);
// Writes through a temporary file and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::shared_ptr<const SurfaceModel> make_surface(const nlohmann::json& surface);
GeneratorSystem make_system(const ExperimentConfig& c);

struct RunReport {
  nlohmann::json summary;
  std::vector<std::filesystem::path> files;
};

// Runs the configured subcommand over `trials` independent itineraries and
// writes results.jsonl, summary.json and the CSV / SVG artifacts into the
// output directory. Surface and numerical failures throw k3dyn::Error;
// failures inside one trial are recorded in that trial's record.
RunReport run_experiment(const ExperimentConfig& c, const std::vector<std::string>& warnings = {});

// Renders a CSV written by run_experiment: kind histogram2d reads
// histogram.csv, scatter reads boundary.csv, growth reads growth.csv.
// Throws EmptyResults when the file holds no data.
std::string plot_from_csv(const std::string& kind, const std::filesystem::path& csv);

}  // namespace k3dyn::cli
