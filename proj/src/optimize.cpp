#include "qsn/optimize.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"

#include "qsn/errors.hpp"
#include "qsn/fisher.hpp"

namespace qsn {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kInf = std::numeric_limits<double>::infinity();

using Objective = std::function<CostGradient(const std::vector<double>&)>;

std::mt19937_64 restart_stream(std::uint64_t seed, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  return std::mt19937_64(seq);
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct RestartState {
  std::vector<double> params;
  AdamState adam;
  int iteration = 0;
  std::string rng_state;
  std::vector<TracePoint> trace;
  std::vector<double> best_params;
  double best_cost = kInf;
};

struct RestartRun {
  bool degenerate = false;
  std::vector<double> best_params;
  double best_cost = kInf;
  std::vector<TracePoint> trace;
};

RestartState fresh_restart(std::uint64_t seed, int restart, std::size_t n_params,
                           const AdamConfig& adam, const std::vector<double>& warm_start = {}) {
  RestartState st;
  auto rng = restart_stream(seed, restart);
  st.params.resize(n_params);
  for (auto& p : st.params) p = 2.0 * std::numbers::pi * unit_uniform(rng);
  if (restart == 0 && !warm_start.empty()) st.params = warm_start;
  std::ostringstream os;
  os << rng;
  st.rng_state = os.str();
  st.adam = AdamState::init(n_params, adam);
  return st;
}

using CheckpointHook = std::function<void(const RestartState&)>;

RestartRun run_restart(const Objective& f, RestartState st, const OptimizerSettings& settings,
                       const CheckpointHook& hook) {
  for (int it = st.iteration; it < settings.max_iters; ++it) {
    CostGradient cg;
    try {
      cg = f(st.params);
    } catch (const DegenerateProbeError&) {
      break;
    }
    st.trace.push_back({it, cg.cost});
    if (cg.cost < st.best_cost) {
      st.best_cost = cg.cost;
      st.best_params = st.params;
    }
    const auto n = st.trace.size();
    if (n > static_cast<std::size_t>(settings.conv_window) &&
        std::abs(st.trace[n - 1].cost - st.trace[n - 1 - settings.conv_window].cost) < settings.conv_tol) {
      break;
    }
    std::tie(st.adam, st.params) = adam_step(std::move(st.adam), std::move(st.params), cg.grad);
    st.iteration = it + 1;
    if (hook && st.iteration % settings.checkpoint_every == 0) hook(st);
  }
  RestartRun run;
  run.degenerate = st.best_params.empty();
  run.best_params = std::move(st.best_params);
  run.best_cost = st.best_cost;
  run.trace = std::move(st.trace);
  return run;
}

void merge(OptimizationResult& merged, RestartRun run) {
  ++merged.restarts_used;
  if (run.degenerate) {
    ++merged.degenerate_restarts;
  } else if (merged.best_params.empty() || run.best_cost < merged.best_cost) {
    merged.best_params = std::move(run.best_params);
    merged.best_cost = run.best_cost;
    merged.cost_trace = std::move(run.trace);
  }
  merged.best_so_far.push_back(merged.best_params.empty() ? kInf : merged.best_cost);
}

OptimizationResult drive(const std::string& stage, const Objective& f, std::size_t n_params,
                         const OptimizerSettings& settings, std::uint64_t seed,
                         const std::optional<OptimizationCheckpoint>& resume) {
  settings.validate();
  if (!settings.warm_start.empty() && settings.warm_start.size() != n_params) {
    throw ConfigError("warm start has " + std::to_string(settings.warm_start.size()) + " parameters, expected " +
                      std::to_string(n_params));
  }
  OptimizationResult merged;
  merged.seed = seed;
  merged.best_cost = kInf;
  int first = 0;
  if (resume) {
    if (resume->stage != stage) throw ConfigError("checkpoint is for stage " + resume->stage);
    if (resume->seed != seed) throw ConfigError("checkpoint seed does not match");
    merged = resume->merged;
    first = resume->restart;
  }

  const auto write_checkpoint = [&](int restart, const RestartState* st) {
    OptimizationCheckpoint cp;
    cp.stage = stage;
    cp.seed = seed;
    cp.restart = restart;
    cp.merged = merged;
    if (st != nullptr) {
      cp.iteration = st->iteration;
      cp.params = st->params;
      cp.adam = st->adam;
      cp.rng_state = st->rng_state;
      cp.trace = st->trace;
      cp.restart_best_params = st->best_params;
      cp.restart_best_cost = st->best_cost;
    }
    if (settings.checkpoint_path) cp.save(*settings.checkpoint_path);
    if (settings.on_checkpoint) settings.on_checkpoint(cp);
  };

  if (settings.threads > 1) {
    for (int base = first; base < settings.restarts; base += settings.threads) {
      std::vector<std::future<RestartRun>> jobs;
      for (int r = base; r < std::min(settings.restarts, base + settings.threads); ++r) {
        jobs.push_back(std::async(std::launch::async, [&, r] {
          return run_restart(f, fresh_restart(seed, r, n_params, settings.adam, settings.warm_start), settings, {});
        }));
      }
      for (auto& j : jobs) merge(merged, j.get());
    }
  } else {
    for (int r = first; r < settings.restarts; ++r) {
      RestartState st;
      if (resume && r == resume->restart && !resume->params.empty()) {
        st.params = resume->params;
        st.adam = resume->adam;
        st.iteration = resume->iteration;
        st.rng_state = resume->rng_state;
        st.trace = resume->trace;
        st.best_params = resume->restart_best_params;
        st.best_cost = resume->restart_best_params.empty() ? kInf : resume->restart_best_cost;
      } else {
        st = fresh_restart(seed, r, n_params, settings.adam, settings.warm_start);
      }
      CheckpointHook hook;
      if (settings.checkpointing()) hook = [&, r](const RestartState& s) { write_checkpoint(r, &s); };
      merge(merged, run_restart(f, std::move(st), settings, hook));
      if (settings.checkpointing()) write_checkpoint(r + 1, nullptr);
    }
  }
  if (merged.best_params.empty()) {
    throw OptimizationFailure(stage + " optimization: all " + std::to_string(merged.restarts_used) +
                              " restarts hit a degenerate probe");
  }
  return merged;
}

// Reverse-mode assembly of dQ for Q = 4(<D|D> - |<Psi|D>|^2), Psi = V psi,
// D = i H Psi. Returns the cotangent c (in the frame before V) such that
// dQ/dtheta_k = Re <c | d psi / d theta_k>.
Amplitudes qfi_cotangent(const Amplitudes& big_psi, const Amplitudes& d, int n, const DMInteraction& dm) {
  const cplx ov = big_psi.dot(d);
  const Amplitudes w_d = -kI * apply_generator_sum(d, n, dm.alpha);         // (iHV)^dag D, before V^dag
  const Amplitudes w_psi = -kI * apply_generator_sum(big_psi, n, dm.alpha);  // (iHV)^dag Psi, before V^dag
  Amplitudes c = 8.0 * w_d - 8.0 * (std::conj(ov) * d + ov * w_psi);
  apply_v_inplace(c, n, {-dm.delta, dm.alpha});  // V^dag
  return c;
}

}  // namespace

AdamState AdamState::init(std::size_t n_params, const AdamConfig& config) {
  AdamState s;
  s.m.assign(n_params, 0.0);
  s.v.assign(n_params, 0.0);
  s.eta = config.eta;
  s.beta1 = config.beta1;
  s.beta2 = config.beta2;
  s.eps = config.eps;
  s.validate();
  return s;
}

void AdamState::validate() const {
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in (0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("Adam eps must be positive");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("Adam learning rate must be positive");
  if (m.size() != v.size()) throw ConfigError("Adam moment sizes differ");
  if (t < 0) throw ConfigError("Adam step count must be non-negative");
}

std::pair<AdamState, std::vector<double>> adam_step(AdamState s, std::vector<double> params,
                                                    std::span<const double> grad) {
  if (params.size() != grad.size() || s.m.size() != params.size()) {
    throw ConfigError("Adam dimension mismatch");
  }
  ++s.t;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * grad[i];
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
    const double m_hat = s.m[i] / c1;
    const double v_hat = s.v[i] / c2;
    params[i] -= s.eta * m_hat / (std::sqrt(v_hat) + s.eps);
  }
  return {std::move(s), std::move(params)};
}

CostGradient cost_theta(const AnsatzSpec& preparation, const DMInteraction& dm) {
  const int n = preparation.n_qubits();
  const StateVector prepared = apply_ansatz(init_ground(n), preparation);
  Amplitudes big_psi = prepared.amplitudes();
  apply_v_inplace(big_psi, n, dm);
  const Amplitudes d = v_delta_derivative(prepared, dm);
  const double q = qfi_pure(StateVector::trusted(n, big_psi), d);
  if (q <= kInfoFloor) throw DegenerateProbeError("QFI " + std::to_string(q) + " at or below floor");

  const Amplitudes cot = qfi_cotangent(big_psi, d, n, dm);
  const Amplitudes ground = init_ground(n).amplitudes();
  CostGradient out;
  out.cost = 1.0 / q;
  out.grad = adjoint_gradient(preparation, std::span(&ground, 1), std::span(&cot, 1));
  const double scale = -1.0 / (q * q);
  for (auto& g : out.grad) g *= scale;
  return out;
}

std::vector<double> grad_cost_theta(const AnsatzSpec& preparation, const DMInteraction& dm) {
  return cost_theta(preparation, dm).grad;
}

CostGradient cost_mu(const StateVector& prepared, const AnsatzSpec& measurement, const DMInteraction& dm) {
  const int n = prepared.n_qubits();
  if (measurement.n_qubits() != n) throw ConfigError("state/measurement qubit mismatch");
  Amplitudes big_psi = prepared.amplitudes();
  apply_v_inplace(big_psi, n, dm);
  const Amplitudes d = v_delta_derivative(prepared, dm);

  Amplitudes a = big_psi, b = d;
  run_circuit(a, measurement);
  run_circuit(b, measurement);
  const auto dim = a.size();
  std::vector<double> p(static_cast<std::size_t>(dim)), dp(static_cast<std::size_t>(dim));
  for (Eigen::Index m = 0; m < dim; ++m) {
    p[static_cast<std::size_t>(m)] = std::norm(a[m]);
    dp[static_cast<std::size_t>(m)] = 2.0 * (std::conj(a[m]) * b[m]).real();
  }
  const double f = cfi(p, dp);
  if (f <= kInfoFloor) throw DegenerateProbeError("CFI " + std::to_string(f) + " at or below floor");

  // dF = sum_m (2 dp/p) d(dp) - (dp/p)^2 d(p), with
  // d(p) = 2 Re(a* da), d(dp) = 2 Re(b* da + a* db).
  Amplitudes ca = Amplitudes::Zero(dim), cb = Amplitudes::Zero(dim);
  for (Eigen::Index m = 0; m < dim; ++m) {
    const double pm = p[static_cast<std::size_t>(m)];
    if (pm < kProbFloor) continue;
    const double w = 2.0 * dp[static_cast<std::size_t>(m)] / pm;
    const double s = (dp[static_cast<std::size_t>(m)] / pm) * (dp[static_cast<std::size_t>(m)] / pm);
    ca[m] = 2.0 * (w * b[m] - s * a[m]);
    cb[m] = 2.0 * w * a[m];
  }
  const std::array<Amplitudes, 2> inputs{big_psi, d};
  const std::array<Amplitudes, 2> cots{ca, cb};
  CostGradient out;
  out.cost = 1.0 / f;
  out.grad = adjoint_gradient(measurement, inputs, cots);
  const double scale = -1.0 / (f * f);
  for (auto& g : out.grad) g *= scale;
  return out;
}

void OptimizerSettings::validate() const {
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (conv_window < 1) throw ConfigError("convergence window must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (checkpoint_every < 1) throw ConfigError("checkpoint interval must be >= 1");
  if (checkpointing() && threads > 1) throw ConfigError("checkpointing requires threads == 1");
  AdamState::init(0, adam);
}

std::vector<double> initial_params(std::uint64_t seed, int restart, std::size_t count) {
  return fresh_restart(seed, restart, count, {}).params;
}

OptimizationResult optimize_preparation(const Topology& topology, int l1, const DMInteraction& dm,
                                        const OptimizerSettings& settings, std::uint64_t seed,
                                        const std::optional<OptimizationCheckpoint>& resume) {
  const std::size_t n_params = param_count(topology, l1);
  const AnsatzSpec base(topology, l1, std::vector<double>(n_params, 0.0));
  const Objective f = [&](const std::vector<double>& theta) {
    return cost_theta(base.with_params(theta), dm);
  };
  return drive("preparation", f, n_params, settings, seed, resume);
}

OptimizationResult optimize_measurement(const AnsatzSpec& preparation, int l2, const DMInteraction& dm,
                                        const OptimizerSettings& settings, std::uint64_t seed,
                                        const std::optional<OptimizationCheckpoint>& resume) {
  if (preparation.daggered()) throw ConfigError("preparation circuit must not be daggered");
  const StateVector prepared = apply_ansatz(init_ground(preparation.n_qubits()), preparation);
  const std::size_t n_params = param_count(preparation.topology(), l2);
  const AnsatzSpec base(preparation.topology(), l2, std::vector<double>(n_params, 0.0), true);
  const Objective f = [&](const std::vector<double>& mu) {
    return cost_mu(prepared, base.with_params(mu), dm);
  };
  return drive("measurement", f, n_params, settings, seed, resume);
}

// ---- checkpoint serialization ----

namespace {

nlohmann::json number_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

double number_from(const nlohmann::json& j) {
  return j.is_null() ? kInf : j.get<double>();
}

nlohmann::json trace_json(const std::vector<TracePoint>& trace) {
  auto arr = nlohmann::json::array();
  for (const auto& p : trace) arr.push_back({p.iteration, p.cost});
  return arr;
}

std::vector<TracePoint> trace_from(const nlohmann::json& j) {
  std::vector<TracePoint> t;
  for (const auto& p : j) t.push_back({p.at(0).get<int>(), p.at(1).get<double>()});
  return t;
}

}  // namespace

void OptimizationCheckpoint::save(const std::filesystem::path& path) const {
  nlohmann::json best_so_far_json = nlohmann::json::array();
  for (double c : merged.best_so_far) best_so_far_json.push_back(number_or_null(c));
  const nlohmann::json j{
      {"stage", stage},
      {"seed", seed},
      {"restart", restart},
      {"iteration", iteration},
      {"params", params},
      {"adam",
       {{"m", adam.m}, {"v", adam.v}, {"t", adam.t}, {"eta", adam.eta}, {"beta1", adam.beta1},
        {"beta2", adam.beta2}, {"eps", adam.eps}}},
      {"rng_state", rng_state},
      {"trace", trace_json(trace)},
      {"restart_best_params", restart_best_params},
      {"restart_best_cost", number_or_null(restart_best_cost)},
      {"merged",
       {{"best_params", merged.best_params},
        {"best_cost", number_or_null(merged.best_cost)},
        {"cost_trace", trace_json(merged.cost_trace)},
        {"restarts_used", merged.restarts_used},
        {"degenerate_restarts", merged.degenerate_restarts},
        {"best_so_far", best_so_far_json}}},
  };
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp);
    if (!out) throw ConfigError("cannot write checkpoint " + tmp.string());
    out << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

OptimizationCheckpoint OptimizationCheckpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    OptimizationCheckpoint cp;
    cp.stage = j.at("stage").get<std::string>();
    cp.seed = j.at("seed").get<std::uint64_t>();
    cp.restart = j.at("restart").get<int>();
    cp.iteration = j.at("iteration").get<int>();
    cp.params = j.at("params").get<std::vector<double>>();
    const auto& a = j.at("adam");
    cp.adam.m = a.at("m").get<std::vector<double>>();
    cp.adam.v = a.at("v").get<std::vector<double>>();
    cp.adam.t = a.at("t").get<long>();
    cp.adam.eta = a.at("eta").get<double>();
    cp.adam.beta1 = a.at("beta1").get<double>();
    cp.adam.beta2 = a.at("beta2").get<double>();
    cp.adam.eps = a.at("eps").get<double>();
    cp.rng_state = j.at("rng_state").get<std::string>();
    cp.trace = trace_from(j.at("trace"));
    cp.restart_best_params = j.at("restart_best_params").get<std::vector<double>>();
    cp.restart_best_cost = number_from(j.at("restart_best_cost"));
    const auto& m = j.at("merged");
    cp.merged.seed = cp.seed;
    cp.merged.best_params = m.at("best_params").get<std::vector<double>>();
    cp.merged.best_cost = number_from(m.at("best_cost"));
    cp.merged.cost_trace = trace_from(m.at("cost_trace"));
    cp.merged.restarts_used = m.at("restarts_used").get<int>();
    cp.merged.degenerate_restarts = m.at("degenerate_restarts").get<int>();
    for (const auto& c : m.at("best_so_far")) cp.merged.best_so_far.push_back(number_from(c));
    if (!cp.params.empty()) cp.adam.validate();
    return cp;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace qsn
