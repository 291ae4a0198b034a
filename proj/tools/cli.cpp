#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qsn/errors.hpp"
#include "qsn/experiments.hpp"

namespace qsn {

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitOptimization = 3;

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("QSN_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != std::string(s).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("QSN_SEED is not a non-negative integer: ") + s);
  }
}

bool file_has_seed(const std::string& path) {
  std::ifstream in(path);
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) return false;
  const auto& c = j.contains("config") ? j.at("config") : j;
  return c.is_object() && c.contains("seed");
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variational quantum sensor network experiments"};
  app.set_version_flag("--version", std::string(artifact_version()));

  std::string experiment, config_path, topology, output_dir;
  std::vector<std::string> topologies;
  int n = 0, l1 = 0, l2 = 0, restarts = 0, max_iters = 0, threads = 0, nu = 0, trials = 0, grid_points = 0;
  double delta = 0, alpha = 0, eta = 0, conv_tol = 0, prior_lo = 0, prior_hi = 0;
  std::uint64_t seed = 0;
  std::vector<double> lambda_grid, delta_grid, alpha_grid;
  bool allow_overdegree = false, no_deepen = false, plot = false;

  app.add_option("experiment", experiment,
                 "qb-compare | qb-depth | qb-sweep | cb-depth | cb-sweep | bayes | noise-sweep | topology-list");
  app.add_option("--config", config_path, "JSON config or manifest; flags override its values")
      ->check(CLI::ExistingFile);
  auto* o_topology = app.add_option("--topology", topology, "builtin name or edge-list file");
  auto* o_topologies = app.add_option("--topologies", topologies, "comma list; GHZ, E and OPT name fixed probes")
                           ->delimiter(',');
  auto* o_n = app.add_option("--n", n, "qubit count of the fixed reference probes");
  auto* o_overdeg = app.add_flag("--allow-overdegree", allow_overdegree, "accept nodes with more than 4 links");
  auto* o_l1 = app.add_option("--L1", l1, "preparation layers (upper end for qb-depth)");
  auto* o_l2 = app.add_option("--L2", l2, "measurement layers (upper end for cb-depth)");
  auto* o_delta = app.add_option("--delta", delta, "interaction phase in rad (true value for bayes)");
  auto* o_alpha = app.add_option("--alpha", alpha, "field phase offset in rad");
  auto* o_restarts = app.add_option("--restarts", restarts, "random restarts per optimization");
  auto* o_iters = app.add_option("--max-iters", max_iters, "Adam iterations per restart");
  auto* o_eta = app.add_option("--eta", eta, "Adam learning rate");
  auto* o_tol = app.add_option("--conv-tol", conv_tol, "stop when the cost moves less than this over 50 steps");
  auto* o_threads = app.add_option("--threads", threads, "restarts run concurrently");
  auto* o_nodeepen = app.add_flag("--no-deepen", no_deepen, "qb-depth: random restarts only");
  auto* o_nu = app.add_option("--nu", nu, "measurement count for bayes");
  auto* o_trials = app.add_option("--trials", trials, "independent bayes trials");
  auto* o_plo = app.add_option("--prior-lo", prior_lo, "lower end of the uniform prior in rad");
  auto* o_phi = app.add_option("--prior-hi", prior_hi, "upper end of the uniform prior in rad");
  auto* o_gp = app.add_option("--grid-points", grid_points, "posterior grid size");
  auto* o_lg = app.add_option("--lambda-grid", lambda_grid, "comma list of dephasing strengths")->delimiter(',');
  auto* o_dg = app.add_option("--delta-grid", delta_grid, "comma list of delta values in rad")->delimiter(',');
  auto* o_ag = app.add_option("--alpha-grid", alpha_grid, "comma list of alpha values in rad")->delimiter(',');
  auto* o_seed = app.add_option("--seed", seed, "RNG seed (fallback: QSN_SEED, then 7)");
  auto* o_out = app.add_option("--out", output_dir, "output directory");
  auto* o_plot = app.add_flag("--emit-plot-script", plot, "also write plot.py next to the CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (!experiment.empty()) {
      c.experiment = parse_experiment(experiment);
    } else if (config_path.empty()) {
      throw ConfigError("an experiment name or --config is required");
    }
    const auto given = [](const CLI::Option* o) { return o->count() > 0; };
    if (given(o_topology)) c.topology = topology;
    if (given(o_topologies)) c.topologies = topologies;
    if (given(o_n)) c.n = n;
    if (given(o_overdeg)) c.allow_overdegree = allow_overdegree;
    if (given(o_l1)) c.l1 = l1;
    if (given(o_l2)) c.l2 = l2;
    if (given(o_delta)) c.delta = delta;
    if (given(o_alpha)) c.alpha = alpha;
    if (given(o_restarts)) c.restarts = restarts;
    if (given(o_iters)) c.max_iters = max_iters;
    if (given(o_eta)) c.eta = eta;
    if (given(o_tol)) c.conv_tol = conv_tol;
    if (given(o_threads)) c.threads = threads;
    if (given(o_nodeepen)) c.deepen = !no_deepen;
    if (given(o_nu)) c.nu = nu;
    if (given(o_trials)) c.trials = trials;
    if (given(o_plo)) c.prior_lo = prior_lo;
    if (given(o_phi)) c.prior_hi = prior_hi;
    if (given(o_gp)) c.grid_points = grid_points;
    if (given(o_lg)) c.lambda_grid = lambda_grid;
    if (given(o_dg)) c.delta_grid = delta_grid;
    if (given(o_ag)) c.alpha_grid = alpha_grid;
    if (given(o_out)) c.output_dir = output_dir;
    if (given(o_plot)) c.emit_plot_script = plot;
    if (given(o_seed)) {
      c.seed = seed;
    } else if (config_path.empty() || !file_has_seed(config_path)) {
      c.seed = env_seed().value_or(kDefaultSeed);
    }

    const auto summary = run(c);
    for (const auto& f : summary.files) out << f.generic_string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const OptimizationFailure& e) {
    err << "optimization failed: " << e.what() << "\n";
    return kExitOptimization;
  } catch (const DegenerateProbeError& e) {
    err << "optimization failed: " << e.what() << "\n";
    return kExitOptimization;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace qsn
