#pragma once

// Experiment driver behind the `qsn` command line tool. Every run writes its
// CSV tables plus a manifest.json that echoes the resolved configuration, so
// `qsn --config <dir>/manifest.json` reproduces the outputs byte for byte.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace qsn {

enum class Experiment { QbCompare, QbDepth, QbSweep, CbDepth, CbSweep, Bayes, NoiseSweep, TopologyList };

std::string_view experiment_name(Experiment e);
/// Throws ConfigError for unknown names.
Experiment parse_experiment(std::string_view name);

std::string_view artifact_version();

inline constexpr std::uint64_t kDefaultSeed = 7;

struct ExperimentConfig {
  Experiment experiment = Experiment::QbCompare;
  std::string topology = "F4";           // builtin name or edge-list path
  std::vector<std::string> topologies;   // qb-compare; also accepts GHZ, E, OPT
  int n = 4;                             // qubits for the GHZ / E / OPT reference probes
  bool allow_overdegree = false;
  int l1 = 1;
  int l2 = 1;
  double delta = 0.05;
  double alpha = 0.0;
  int restarts = 5;
  int max_iters = 2000;
  double eta = 0.01;
  double conv_tol = 1e-10;
  int threads = 1;
  bool deepen = true;  // qb-depth: also restart from the previous depth's optimum
  int nu = 10000;
  int trials = 1;
  double prior_lo = 0.0;
  double prior_hi = 0.15;
  int grid_points = 1001;
  std::vector<double> lambda_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> delta_grid{1e-3, 1e-2, 1e-1, 1.0};
  std::vector<double> alpha_grid;  // empty: 17 points on [0, pi]
  std::uint64_t seed = kDefaultSeed;
  std::filesystem::path output_dir = "results";
  bool emit_plot_script = false;

  /// Range and consistency checks; throws ConfigError.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);
/// Accepts a bare config object or a manifest holding one under "config".
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunSummary {
  std::vector<std::filesystem::path> files;  // written outputs, manifest last
};

/// Runs one experiment and writes its outputs into config.output_dir.
/// Throws ConfigError / DomainError on invalid input, OptimizationFailure
/// when every restart degenerates.
RunSummary run(const ExperimentConfig& config);

}  // namespace qsn
