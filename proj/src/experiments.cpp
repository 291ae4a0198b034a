#include "qsn/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

#include "qsn/ansatz.hpp"
#include "qsn/bayes.hpp"
#include "qsn/dm.hpp"
#include "qsn/errors.hpp"
#include "qsn/fisher.hpp"
#include "qsn/io.hpp"
#include "qsn/noise.hpp"
#include "qsn/optimize.hpp"
#include "qsn/topology.hpp"

namespace qsn {

namespace {

using nlohmann::json;

constexpr std::array<std::pair<Experiment, std::string_view>, 8> kExperimentNames{{
    {Experiment::QbCompare, "qb-compare"},
    {Experiment::QbDepth, "qb-depth"},
    {Experiment::QbSweep, "qb-sweep"},
    {Experiment::CbDepth, "cb-depth"},
    {Experiment::CbSweep, "cb-sweep"},
    {Experiment::Bayes, "bayes"},
    {Experiment::NoiseSweep, "noise-sweep"},
    {Experiment::TopologyList, "topology-list"},
}};

// Relative QFI difference under which probes share a rank. The default stop
// rule (cost change < 1e-10 over 50 steps at costs ~1e-2) resolves the
// optimum only to a few 1e-9 relative.
constexpr double kRankTieTol = 1e-8;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent seeds for the measurement stage and for Bayesian trials.
std::uint64_t measurement_seed(std::uint64_t seed) { return splitmix64(seed ^ 0x6D656173ULL); }
std::uint64_t trial_seed(std::uint64_t seed, int trial) {
  return splitmix64(splitmix64(seed) + static_cast<std::uint64_t>(trial));
}

class Csv {
 public:
  Csv(std::string units, std::vector<std::string> columns) : columns_(columns.size()) {
    out_ << "# units: " << units << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
  }

  template <typename... Cells>
  void row(const Cells&... cells) {
    static_assert(sizeof...(Cells) > 0);
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << cell(cells)), ...);
    if (i != columns_) throw std::logic_error("csv row width mismatch");
    out_ << "\n";
  }

  void write(const std::filesystem::path& path) const { write_file_atomic(path, out_.str()); }

 private:
  static std::string cell(double x) { return format_double(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(long long x) { return std::to_string(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }

  std::ostringstream out_;
  std::size_t columns_;
};

OptimizerSettings settings_of(const ExperimentConfig& c) {
  OptimizerSettings s;
  s.restarts = c.restarts;
  s.max_iters = c.max_iters;
  s.adam.eta = c.eta;
  s.conv_tol = c.conv_tol;
  s.threads = c.threads;
  return s;
}

struct Prepared {
  AnsatzSpec spec;
  OptimizationResult result;
};

Prepared prepare(const ExperimentConfig& c) {
  const Topology t = resolve_topology(c.topology, c.allow_overdegree);
  const DMInteraction dm{c.delta, c.alpha};
  auto r = optimize_preparation(t, c.l1, dm, settings_of(c), c.seed);
  AnsatzSpec spec(t, c.l1, r.best_params);
  return {std::move(spec), std::move(r)};
}

Prepared measure(const ExperimentConfig& c, const AnsatzSpec& prep, int l2) {
  const DMInteraction dm{c.delta, c.alpha};
  auto r = optimize_measurement(prep, l2, dm, settings_of(c), measurement_seed(c.seed));
  AnsatzSpec spec(prep.topology(), l2, r.best_params, true);
  return {std::move(spec), std::move(r)};
}

StateVector prepared_state(const AnsatzSpec& prep) {
  return apply_ansatz(init_ground(prep.n_qubits()), prep);
}

double heisenberg_fraction(double qfi, int n) { return qfi / (4.0 * n * n); }

std::string edge_string(const Topology& t) {
  std::string s;
  for (const auto& e : t.edges()) {
    if (!s.empty()) s += ' ';
    s += std::to_string(e.a) + "-" + std::to_string(e.b);
  }
  return s;
}

// ---- experiments; each returns the file names it wrote plus a summary ----

struct Output {
  std::vector<std::filesystem::path> files;
  json summary = json::object();
};

Output topology_list(const ExperimentConfig& c) {
  const auto names = c.topologies.empty() ? builtin_names() : c.topologies;
  Csv csv("counts and degrees are dimensionless",
          {"name", "n_qubits", "n_edges", "max_degree", "degree_ok", "params_per_layer", "edges"});
  for (const auto& name : names) {
    const Topology t = resolve_topology(name, true);
    csv.row(t.name(), t.n_qubits(), t.edges().size(), t.max_degree(),
            std::string(validate(t, false).ok ? "true" : "false"), 6 * t.edges().size(), edge_string(t));
  }
  const auto path = c.output_dir / "topologies.csv";
  csv.write(path);
  return {{path}};
}

Output qb_compare(const ExperimentConfig& c) {
  struct Row {
    std::string probe, kind;
    int n_qubits;
    int l1;
    std::size_t n_params;
    double qfi;
    int iterations;
  };
  const DMInteraction dm{c.delta, c.alpha};
  const auto names = c.topologies.empty() ? std::vector<std::string>{c.topology} : c.topologies;
  std::vector<Row> rows;
  json params = json::object();
  for (const auto& name : names) {
    if (name == "GHZ" || name == "E" || name == "OPT") {
      const StateVector probe = name == "GHZ" ? ghz_state(c.n) : name == "E" ? excited_state(c.n)
                                                                               : optimal_state(c.n, c.alpha);
      rows.push_back({name, "fixed", c.n, 0, 0, probe_qfi(probe, dm), 0});
      continue;
    }
    const Topology t = resolve_topology(name, c.allow_overdegree);
    const auto r = optimize_preparation(t, c.l1, dm, settings_of(c), c.seed);
    rows.push_back({t.name(), "optimized", t.n_qubits(), c.l1, r.best_params.size(), 1.0 / r.best_cost,
                    static_cast<int>(r.cost_trace.size())});
    params[t.name()] = r.best_params;
  }

  // Competition ranking by QB (ascending); probes within kRankTieTol share a rank.
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rows[a].qfi > rows[b].qfi; });
  std::vector<int> rank(rows.size(), 1);
  std::size_t leader = order.front();
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto i = order[k];
    if (rows[leader].qfi - rows[i].qfi > kRankTieTol * rows[leader].qfi) leader = i;
    rank[i] = i == leader ? static_cast<int>(k) + 1 : rank[leader];
  }

  Csv csv("qfi dimensionless; qb rad^2 per measurement (1/qfi); heisenberg_fraction = qfi/(4 n^2)",
          {"rank", "probe", "kind", "n_qubits", "l1", "n_params", "qfi", "qb", "heisenberg_fraction", "iterations"});
  for (auto i : order) {
    const Row& r = rows[i];
    csv.row(rank[i], r.probe, r.kind, r.n_qubits, r.l1, r.n_params, r.qfi, 1.0 / r.qfi,
            heisenberg_fraction(r.qfi, r.n_qubits), r.iterations);
  }
  const auto path = c.output_dir / "qb_compare.csv";
  csv.write(path);
  Output out{{path}};
  json best = json::array();
  for (auto i : order) {
    if (rank[i] == 1) best.push_back(rows[i].probe);
  }
  out.summary["best"] = best;
  out.summary["params"] = params;
  return out;
}

Output qb_depth(const ExperimentConfig& c) {
  if (c.l1 < 1) throw ConfigError("qb-depth needs L1 >= 1");
  const Topology t = resolve_topology(c.topology, c.allow_overdegree);
  const DMInteraction dm{c.delta, c.alpha};
  Csv csv("qfi dimensionless; qb rad^2 per measurement; heisenberg_fraction = qfi/(4 n^2)",
          {"l1", "n_params", "start", "qfi", "qb", "heisenberg_fraction", "iterations"});
  std::vector<double> previous;
  for (int l = 1; l <= c.l1; ++l) {
    auto s = settings_of(c);
    const bool deepened = c.deepen && !previous.empty();
    if (deepened) s.warm_start = deepen_params(t, previous, l - 1, l);
    const auto r = optimize_preparation(t, l, dm, s, c.seed);
    const double qfi = 1.0 / r.best_cost;
    csv.row(l, r.best_params.size(), std::string(deepened ? "deepened+random" : "random"), qfi, r.best_cost,
            heisenberg_fraction(qfi, t.n_qubits()), static_cast<int>(r.cost_trace.size()));
    previous = r.best_params;
  }
  const auto path = c.output_dir / "qb_depth.csv";
  csv.write(path);
  return {{path}};
}

Output qb_sweep(const ExperimentConfig& c) {
  const auto p = prepare(c);
  const StateVector probe = prepared_state(p.spec);
  Csv csv("delta and alpha in rad; qfi dimensionless; qb rad^2 per measurement", {"delta", "alpha", "qfi", "qb"});
  for (double d : c.delta_grid) {
    for (double a : c.alpha_grid) {
      const double qfi = probe_qfi(probe, {d, a});
      csv.row(d, a, qfi, 1.0 / qfi);
    }
  }
  const auto path = c.output_dir / "qb_sweep.csv";
  csv.write(path);
  Output out{{path}};
  out.summary["preparation_qfi"] = 1.0 / p.result.best_cost;
  return out;
}

Output cb_depth(const ExperimentConfig& c) {
  if (c.l2 < 1) throw ConfigError("cb-depth needs L2 >= 1");
  const auto p = prepare(c);
  const double qfi = 1.0 / p.result.best_cost;
  Csv csv("cfi and qfi dimensionless; cb and qb rad^2 per measurement",
          {"l2", "n_params", "qfi", "qb", "cfi", "cb", "cb_over_qb", "iterations"});
  for (int l = 1; l <= c.l2; ++l) {
    const auto m = measure(c, p.spec, l);
    const auto rep = FisherReport::make(qfi, 1.0 / m.result.best_cost, {p.spec.topology().name(), c.l1, l, c.delta, c.alpha});
    csv.row(l, m.result.best_params.size(), rep.qfi, rep.qb, *rep.cfi, *rep.cb, *rep.cb / rep.qb,
            static_cast<int>(m.result.cost_trace.size()));
  }
  const auto path = c.output_dir / "cb_depth.csv";
  csv.write(path);
  return {{path}};
}

Output cb_sweep(const ExperimentConfig& c) {
  const auto p = prepare(c);
  const auto m = measure(c, p.spec, c.l2);
  const StateVector probe = prepared_state(p.spec);
  Csv csv("delta and alpha in rad; cfi and qfi dimensionless; cb and qb rad^2 per measurement",
          {"delta", "alpha", "qfi", "qb", "cfi", "cb"});
  for (double d : c.delta_grid) {
    for (double a : c.alpha_grid) {
      const auto rep = FisherReport::make(probe_qfi(probe, {d, a}), measurement_cfi(probe, {d, a}, m.spec),
                                          {p.spec.topology().name(), c.l1, c.l2, d, a});
      csv.row(d, a, rep.qfi, rep.qb, *rep.cfi, *rep.cb);
    }
  }
  const auto path = c.output_dir / "cb_sweep.csv";
  csv.write(path);
  return {{path}};
}

std::vector<int> snapshot_counts(int nu) {
  std::vector<int> s;
  for (long long k = 1; k < nu; k *= 10) s.push_back(static_cast<int>(k));
  s.push_back(nu);
  return s;
}

Output bayes(const ExperimentConfig& c) {
  if (c.delta < c.prior_lo || c.delta > c.prior_hi) throw ConfigError("delta must lie inside the prior interval");
  const auto p = prepare(c);
  const auto m = measure(c, p.spec, c.l2);
  const double qfi = 1.0 / p.result.best_cost;
  const double cfi = 1.0 / m.result.best_cost;
  const auto grid = linspace(c.prior_lo, c.prior_hi, c.grid_points);
  const LikelihoodTable table = likelihood_table(p.spec, m.spec, c.alpha, grid);
  const auto truth = measurement_probabilities(prepared_state(p.spec), {c.delta, c.alpha}, m.spec);
  const auto snaps = snapshot_counts(c.nu);

  Csv est("delta, mean and bias in rad; variance and variance_floor in rad^2; nu_variance = nu*variance",
          {"trial", "nu", "mean", "bias", "variance", "nu_variance", "qb", "cb", "grid_spacing", "variance_floor"});
  Csv post_csv("delta in rad; weight is the normalized posterior mass per grid point", {"nu", "delta", "weight"});
  for (int trial = 0; trial < c.trials; ++trial) {
    const auto outcomes = sample_outcomes(truth, c.nu, trial_seed(c.seed, trial));
    Posterior post = Posterior::uniform(grid);
    int used = 0;
    for (int target : snaps) {
      const auto batch = outcome_counts(std::span(outcomes).subspan(static_cast<std::size_t>(used),
                                                                     static_cast<std::size_t>(target - used)),
                                        table.n_outcomes());
      post = update_posterior_counts(std::move(post), batch, table);
      used = target;
      const auto r = estimate(post, c.delta);
      est.row(trial, target, r.mean, r.bias, r.variance, r.variance * target, 1.0 / qfi, 1.0 / cfi, r.grid_spacing,
              r.variance_floor);
      if (trial == 0) {
        for (std::size_t g = 0; g < grid.size(); ++g) post_csv.row(target, grid[g], post.weights()[g]);
      }
    }
  }
  const auto est_path = c.output_dir / "bayes_estimates.csv";
  const auto post_path = c.output_dir / "bayes_posterior.csv";
  est.write(est_path);
  post_csv.write(post_path);
  Output out{{est_path, post_path}};
  out.summary["qfi"] = qfi;
  out.summary["cfi"] = cfi;
  return out;
}

Output noise_sweep(const ExperimentConfig& c) {
  const auto p = prepare(c);
  const auto sweep = dephasing_sweep(p.spec, {c.delta, c.alpha}, c.lambda_grid);
  const auto path = c.output_dir / "noise_sweep.csv";
  write_sweep_csv(path, sweep);
  Output out{{path}};
  out.summary["delta_vs_noiseless"] = sweep.delta_vs_noiseless;
  return out;
}

constexpr std::string_view kPlotScript = R"(#!/usr/bin/env python3
"""Plots every CSV in this directory: first column on x, numeric columns on y."""
import glob
import os

import matplotlib.pyplot as plt
import pandas as pd

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "*.csv"))):
    df = pd.read_csv(path, comment="#")
    x = df.columns[0]
    ys = [c for c in df.columns[1:] if pd.api.types.is_numeric_dtype(df[c])]
    if not ys:
        continue
    fig, axes = plt.subplots(len(ys), 1, figsize=(6, 2.2 * len(ys)), sharex=True, squeeze=False)
    for ax, y in zip(axes[:, 0], ys):
        ax.plot(df[x], df[y], ".-")
        ax.set_ylabel(y)
    axes[-1, 0].set_xlabel(x)
    fig.suptitle(os.path.basename(path))
    fig.tight_layout()
    fig.savefig(path[:-4] + ".png", dpi=120)
    plt.close(fig)
)";

std::vector<double> default_alpha_grid() { return linspace(0.0, std::numbers::pi, 17); }

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

std::string_view experiment_name(Experiment e) {
  for (const auto& [k, v] : kExperimentNames) {
    if (k == e) return v;
  }
  return "unknown";
}

Experiment parse_experiment(std::string_view name) {
  for (const auto& [k, v] : kExperimentNames) {
    if (v == name) return k;
  }
  std::string known;
  for (const auto& [k, v] : kExperimentNames) known += (known.empty() ? "" : ", ") + std::string(v);
  throw ConfigError("unknown experiment '" + std::string(name) + "' (expected one of " + known + ")");
}

std::string_view artifact_version() { return QSN_VERSION; }

void ExperimentConfig::validate() const {
  const auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(!topology.empty(), "topology must not be empty");
  require(n >= 1 && n <= kMaxQubits, "n must be in [1, " + std::to_string(kMaxQubits) + "]");
  require(l1 >= 0 && l2 >= 0, "L1 and L2 must be non-negative");
  require(std::isfinite(delta) && std::isfinite(alpha), "delta and alpha must be finite");
  require(restarts >= 1, "restarts must be >= 1");
  require(max_iters >= 1, "max_iters must be >= 1");
  require(eta > 0.0 && std::isfinite(eta), "eta must be positive");
  require(conv_tol >= 0.0, "conv_tol must be non-negative");
  require(threads >= 1, "threads must be >= 1");
  require(nu >= 1, "nu must be >= 1");
  require(trials >= 1, "trials must be >= 1");
  require(grid_points >= 2 && prior_hi > prior_lo, "prior grid needs >= 2 points and prior_hi > prior_lo");
  for (double l : lambda_grid) require(l >= 0.0 && l <= 1.0, "lambda values must lie in [0, 1]");
  require(!lambda_grid.empty() && lambda_grid.front() == 0.0, "lambda_grid must start at 0");
  for (double d : delta_grid) require(std::isfinite(d), "delta_grid values must be finite");
  for (double a : alpha_grid) require(std::isfinite(a), "alpha_grid values must be finite");
  require(!output_dir.empty(), "output_dir must not be empty");
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return json{
      {"experiment", experiment_name(c.experiment)},
      {"topology", c.topology},
      {"topologies", c.topologies},
      {"n", c.n},
      {"allow_overdegree", c.allow_overdegree},
      {"L1", c.l1},
      {"L2", c.l2},
      {"delta", c.delta},
      {"alpha", c.alpha},
      {"restarts", c.restarts},
      {"max_iters", c.max_iters},
      {"eta", c.eta},
      {"conv_tol", c.conv_tol},
      {"threads", c.threads},
      {"deepen", c.deepen},
      {"nu", c.nu},
      {"trials", c.trials},
      {"prior_lo", c.prior_lo},
      {"prior_hi", c.prior_hi},
      {"grid_points", c.grid_points},
      {"lambda_grid", c.lambda_grid},
      {"delta_grid", c.delta_grid},
      {"alpha_grid", c.alpha_grid},
      {"seed", c.seed},
      {"output_dir", c.output_dir.generic_string()},
      {"emit_plot_script", c.emit_plot_script},
  };
}

ExperimentConfig config_from_json(const nlohmann::json& j_in, ExperimentConfig c) {
  const json& j = j_in.contains("config") ? j_in.at("config") : j_in;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const json known = to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  try {
    if (j.contains("experiment")) c.experiment = parse_experiment(j.at("experiment").get<std::string>());
    read_key(j, "topology", c.topology);
    read_key(j, "topologies", c.topologies);
    read_key(j, "n", c.n);
    read_key(j, "allow_overdegree", c.allow_overdegree);
    read_key(j, "L1", c.l1);
    read_key(j, "L2", c.l2);
    read_key(j, "delta", c.delta);
    read_key(j, "alpha", c.alpha);
    read_key(j, "restarts", c.restarts);
    read_key(j, "max_iters", c.max_iters);
    read_key(j, "eta", c.eta);
    read_key(j, "conv_tol", c.conv_tol);
    read_key(j, "threads", c.threads);
    read_key(j, "deepen", c.deepen);
    read_key(j, "nu", c.nu);
    read_key(j, "trials", c.trials);
    read_key(j, "prior_lo", c.prior_lo);
    read_key(j, "prior_hi", c.prior_hi);
    read_key(j, "grid_points", c.grid_points);
    read_key(j, "lambda_grid", c.lambda_grid);
    read_key(j, "delta_grid", c.delta_grid);
    read_key(j, "alpha_grid", c.alpha_grid);
    read_key(j, "seed", c.seed);
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    read_key(j, "emit_plot_script", c.emit_plot_script);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
}

RunSummary run(const ExperimentConfig& config_in) {
  ExperimentConfig c = config_in;
  if (c.alpha_grid.empty()) c.alpha_grid = default_alpha_grid();
  c.validate();

  Output out;
  switch (c.experiment) {
    case Experiment::TopologyList: out = topology_list(c); break;
    case Experiment::QbCompare: out = qb_compare(c); break;
    case Experiment::QbDepth: out = qb_depth(c); break;
    case Experiment::QbSweep: out = qb_sweep(c); break;
    case Experiment::CbDepth: out = cb_depth(c); break;
    case Experiment::CbSweep: out = cb_sweep(c); break;
    case Experiment::Bayes: out = bayes(c); break;
    case Experiment::NoiseSweep: out = noise_sweep(c); break;
  }

  if (c.emit_plot_script) {
    const auto path = c.output_dir / "plot.py";
    write_file_atomic(path, kPlotScript);
    out.files.push_back(path);
  }

  json files = json::array();
  for (const auto& f : out.files) files.push_back(f.filename().generic_string());
  const json manifest{
      {"artifact", "qsn"},
      {"version", artifact_version()},
      {"experiment", experiment_name(c.experiment)},
      {"seed", c.seed},
      {"config", to_json(c)},
      {"outputs", files},
      {"summary", out.summary},
  };
  const auto manifest_path = c.output_dir / "manifest.json";
  write_file_atomic(manifest_path, manifest.dump(2) + "\n");
  out.files.push_back(manifest_path);
  return {out.files};
}

}  // namespace qsn
