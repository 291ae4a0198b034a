#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qsn/ansatz.hpp"
#include "qsn/dm.hpp"
#include "qsn/topology.hpp"

namespace qsn {

/// Costs are 1/info; below this information floor a probe is degenerate.
inline constexpr double kInfoFloor = 1e-9;

struct AdamConfig {
  double eta = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;
  double eta = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState init(std::size_t n_params, const AdamConfig& config = {});
  void validate() const;
};

/// One Adam update:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
///   params <- params - eta * m_hat / (sqrt(v_hat) + eps)
/// with bias-corrected m_hat, v_hat at the incremented t.
std::pair<AdamState, std::vector<double>> adam_step(AdamState state, std::vector<double> params,
                                                    std::span<const double> grad);

struct CostGradient {
  double cost = 0.0;
  std::vector<double> grad;
};

/// 1/Q of V U(theta)|0> and its exact theta-gradient. Throws
/// DegenerateProbeError when Q <= kInfoFloor.
CostGradient cost_theta(const AnsatzSpec& preparation, const DMInteraction& dm);
std::vector<double> grad_cost_theta(const AnsatzSpec& preparation, const DMInteraction& dm);

/// 1/F of the readout M(mu) V |prepared> and its exact mu-gradient.
CostGradient cost_mu(const StateVector& prepared, const AnsatzSpec& measurement,
                     const DMInteraction& dm);

struct OptimizationCheckpoint;

struct OptimizerSettings {
  int restarts = 5;
  int max_iters = 2000;
  AdamConfig adam;
  double conv_tol = 1e-10;  // |C_t - C_{t-window}| below this stops a restart
  int conv_window = 50;
  int threads = 1;  // restarts run concurrently when > 1
  /// Optional starting point for restart 0 instead of a random draw.
  std::vector<double> warm_start;
  /// When set, a checkpoint is written every `checkpoint_every` iterations
  /// and at each restart boundary. Requires threads == 1.
  std::optional<std::filesystem::path> checkpoint_path;
  int checkpoint_every = 100;
  /// Observer invoked with every checkpoint (also enables checkpointing).
  std::function<void(const OptimizationCheckpoint&)> on_checkpoint;

  bool checkpointing() const { return checkpoint_path.has_value() || static_cast<bool>(on_checkpoint); }

  void validate() const;
};

struct TracePoint {
  int iteration = 0;
  double cost = 0.0;
  bool operator==(const TracePoint&) const = default;
};

struct OptimizationResult {
  std::vector<double> best_params;
  double best_cost = 0.0;
  std::vector<TracePoint> cost_trace;  // trace of the winning restart
  int restarts_used = 0;
  int degenerate_restarts = 0;
  std::uint64_t seed = 0;
  std::vector<double> best_so_far;  // best cost after each restart
};

/// Everything needed to continue an interrupted optimization bit-exactly.
struct OptimizationCheckpoint {
  std::string stage;  // "preparation" or "measurement"
  std::uint64_t seed = 0;
  int restart = 0;  // restart in progress
  int iteration = 0;  // next iteration to evaluate within `restart`
  std::vector<double> params;
  AdamState adam;
  std::string rng_state;  // restart stream state after drawing initial params
  std::vector<TracePoint> trace;  // current restart
  std::vector<double> restart_best_params;
  double restart_best_cost = 0.0;
  OptimizationResult merged;  // restarts completed so far

  void save(const std::filesystem::path& path) const;
  static OptimizationCheckpoint load(const std::filesystem::path& path);
};

/// Uniform [0, 2 pi) initial parameters for restart `restart` of `seed`.
std::vector<double> initial_params(std::uint64_t seed, int restart, std::size_t count);

OptimizationResult optimize_preparation(const Topology& topology, int l1, const DMInteraction& dm,
                                        const OptimizerSettings& settings, std::uint64_t seed,
                                        const std::optional<OptimizationCheckpoint>& resume = {});

/// Optimizes the daggered-structure measurement M(mu) with `l2` layers on
/// the preparation's topology, for the fixed optimal preparation.
OptimizationResult optimize_measurement(const AnsatzSpec& preparation, int l2, const DMInteraction& dm,
                                        const OptimizerSettings& settings, std::uint64_t seed,
                                        const std::optional<OptimizationCheckpoint>& resume = {});

}  // namespace qsn
