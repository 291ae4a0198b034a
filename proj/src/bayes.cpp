#include "qsn/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "qsn/errors.hpp"
#include "qsn/fisher.hpp"
#include "qsn/io.hpp"

namespace qsn {

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 2 || !(hi > lo)) throw ConfigError("grid needs >= 2 points and hi > lo");
  std::vector<double> g(static_cast<std::size_t>(points));
  const double step = (hi - lo) / (points - 1);
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo + step * i;
  g.back() = hi;
  return g;
}

LikelihoodTable::LikelihoodTable(std::vector<double> grid, int n_outcomes, std::vector<double> row_major)
    : grid_(std::move(grid)), n_outcomes_(n_outcomes), probs_(std::move(row_major)) {
  if (n_outcomes_ < 1 || probs_.size() != grid_.size() * static_cast<std::size_t>(n_outcomes_)) {
    throw ConfigError("likelihood table shape mismatch");
  }
  for (std::size_t g = 0; g < grid_.size(); ++g) {
    double s = 0.0;
    for (double p : row(g)) {
      if (p < -kProbFloor || !std::isfinite(p)) throw NumericError("invalid likelihood entry");
      s += p;
    }
    if (std::abs(s - 1.0) > kProbSumTol) throw NumericError("likelihood row does not sum to 1");
  }
}

LikelihoodTable likelihood_table(const AnsatzSpec& preparation, const AnsatzSpec& measurement,
                                 double alpha, std::vector<double> grid) {
  if (grid.empty()) throw ConfigError("empty delta grid");
  const StateVector prepared = apply_ansatz(init_ground(preparation.n_qubits()), preparation);
  const int n_outcomes = 1 << preparation.n_qubits();
  std::vector<double> flat;
  flat.reserve(grid.size() * static_cast<std::size_t>(n_outcomes));
  for (double delta : grid) {
    const auto p = measurement_probabilities(prepared, {delta, alpha}, measurement);
    flat.insert(flat.end(), p.begin(), p.end());
  }
  return {std::move(grid), n_outcomes, std::move(flat)};
}

std::vector<int> sample_outcomes(std::span<const double> probs, int nu, std::uint64_t seed) {
  if (nu < 1) throw ConfigError("measurement count must be >= 1");
  if (probs.empty()) throw ConfigError("empty distribution");
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t m = 0; m < probs.size(); ++m) {
    if (probs[m] < -kProbFloor) throw NumericError("negative probability");
    acc += std::max(probs[m], 0.0);
    cdf[m] = acc;
  }
  if (std::abs(acc - 1.0) > kProbSumTol) throw NumericError("probabilities do not sum to 1");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);
  std::vector<int> out(static_cast<std::size_t>(nu));
  for (auto& o : out) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) it = std::prev(cdf.end());
    o = static_cast<int>(it - cdf.begin());
  }
  return out;
}

std::vector<long long> outcome_counts(std::span<const int> outcomes, int n_outcomes) {
  std::vector<long long> c(static_cast<std::size_t>(n_outcomes), 0);
  for (int o : outcomes) {
    if (o < 0 || o >= n_outcomes) throw ConfigError("outcome index out of range");
    ++c[static_cast<std::size_t>(o)];
  }
  return c;
}

Posterior::Posterior(std::vector<double> grid, std::vector<double> weights, long long nu_used)
    : grid_(std::move(grid)), nu_used_(nu_used) {
  if (grid_.empty() || weights.size() != grid_.size()) throw ConfigError("posterior grid/weight mismatch");
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    if (!(grid_[i] > grid_[i - 1])) throw ConfigError("posterior grid must be strictly increasing");
  }
  log_weights_.resize(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0 || !std::isfinite(weights[i])) throw NumericError("invalid posterior weight");
    log_weights_[i] = weights[i] > 0.0 ? std::log(weights[i]) : -std::numeric_limits<double>::infinity();
  }
  renormalize();
}

Posterior Posterior::uniform(std::vector<double> grid) {
  std::vector<double> w(grid.size(), 1.0);
  return {std::move(grid), std::move(w)};
}

void Posterior::renormalize() {
  const double top = *std::max_element(log_weights_.begin(), log_weights_.end());
  if (!std::isfinite(top)) throw DegenerateLikelihoodError("posterior has no remaining mass");
  double sum = 0.0;
  for (double lw : log_weights_) sum += std::exp(lw - top);
  const double log_norm = top + std::log(sum);
  weights_.resize(log_weights_.size());
  for (std::size_t i = 0; i < log_weights_.size(); ++i) {
    log_weights_[i] -= log_norm;
    weights_[i] = std::exp(log_weights_[i]);
  }
}

void Posterior::absorb(std::span<const long long> counts, const LikelihoodTable& table) {
  if (table.grid() != grid_) throw ConfigError("likelihood grid differs from posterior grid");
  if (counts.size() != static_cast<std::size_t>(table.n_outcomes())) throw ConfigError("count vector size mismatch");
  long long total = 0;
  for (long long c : counts) {
    if (c < 0) throw ConfigError("negative outcome count");
    total += c;
  }
  for (std::size_t g = 0; g < grid_.size(); ++g) {
    for (std::size_t m = 0; m < counts.size(); ++m) {
      const long long c = counts[m];
      if (c == 0) continue;
      const double p = table.at(g, static_cast<int>(m));
      log_weights_[g] += p > 0.0 ? static_cast<double>(c) * std::log(p)
                                 : -std::numeric_limits<double>::infinity();
    }
  }
  nu_used_ += total;
  renormalize();
}

Posterior update_posterior(Posterior post, int outcome, const LikelihoodTable& table) {
  if (outcome < 0 || outcome >= table.n_outcomes()) throw ConfigError("outcome index out of range");
  std::vector<long long> counts(static_cast<std::size_t>(table.n_outcomes()), 0);
  counts[static_cast<std::size_t>(outcome)] = 1;
  post.absorb(counts, table);
  return post;
}

Posterior update_posterior_counts(Posterior post, std::span<const long long> counts,
                                  const LikelihoodTable& table) {
  post.absorb(counts, table);
  return post;
}

EstimateReport estimate(const Posterior& post, double delta_true) {
  const auto& x = post.grid();
  const auto& w = post.weights();
  EstimateReport r;
  for (std::size_t i = 0; i < x.size(); ++i) r.mean += x[i] * w[i];
  for (std::size_t i = 0; i < x.size(); ++i) r.variance += (x[i] - r.mean) * (x[i] - r.mean) * w[i];
  r.bias = r.mean - delta_true;
  r.nu = post.nu_used();
  if (x.size() > 1) {
    r.grid_spacing = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
    r.variance_floor = r.grid_spacing * r.grid_spacing / 12.0;
  }
  return r;
}

std::pair<double, double> credible_interval(const Posterior& post, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("credible level must be in (0, 1)");
  const double tail = (1.0 - level) / 2.0;
  const auto& x = post.grid();
  const auto& w = post.weights();
  double cdf = 0.0;
  double lo = x.front(), hi = x.back();
  bool have_lo = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cdf += w[i];
    if (!have_lo && cdf >= tail) {
      lo = x[i];
      have_lo = true;
    }
    if (cdf >= 1.0 - tail) {
      hi = x[i];
      break;
    }
  }
  return {lo, hi};
}

void write_posterior_csv(const std::filesystem::path& path, const Posterior& post) {
  std::ostringstream out;
  out << "delta,weight\n";
  for (std::size_t i = 0; i < post.grid().size(); ++i) {
    out << format_double(post.grid()[i]) << "," << format_double(post.weights()[i]) << "\n";
  }
  write_file_atomic(path, out.str());
}

}  // namespace qsn
