#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "qsn/ansatz.hpp"

namespace qsn {

/// `points` equally spaced values from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int points);

/// p(m | delta_g) for every grid point g and outcome m.
class LikelihoodTable {
 public:
  LikelihoodTable(std::vector<double> grid, int n_outcomes, std::vector<double> row_major);

  const std::vector<double>& grid() const { return grid_; }
  int n_outcomes() const { return n_outcomes_; }
  std::span<const double> row(std::size_t g) const {
    return {probs_.data() + g * static_cast<std::size_t>(n_outcomes_), static_cast<std::size_t>(n_outcomes_)};
  }
  double at(std::size_t g, int outcome) const { return probs_[g * static_cast<std::size_t>(n_outcomes_) + static_cast<std::size_t>(outcome)]; }

 private:
  std::vector<double> grid_;
  int n_outcomes_;
  std::vector<double> probs_;
};

/// Rows are computational-basis probabilities of M(mu) V(delta_g, alpha) U(theta)|0>.
LikelihoodTable likelihood_table(const AnsatzSpec& preparation, const AnsatzSpec& measurement,
                                 double alpha, std::vector<double> grid);

/// nu i.i.d. draws from a categorical distribution; deterministic in seed.
std::vector<int> sample_outcomes(std::span<const double> probs, int nu, std::uint64_t seed);

/// Occurrence count of each outcome index.
std::vector<long long> outcome_counts(std::span<const int> outcomes, int n_outcomes);

/// Discretized posterior over delta. Weights are kept in log space and
/// exposed normalized.
class Posterior {
 public:
  Posterior(std::vector<double> grid, std::vector<double> weights, long long nu_used = 0);
  static Posterior uniform(std::vector<double> grid);

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& weights() const { return weights_; }
  long long nu_used() const { return nu_used_; }

  /// Multiplies by likelihood^count for each outcome, renormalizes.
  /// Throws DegenerateLikelihoodError if every weight vanishes.
  void absorb(std::span<const long long> counts, const LikelihoodTable& table);

 private:
  void renormalize();

  std::vector<double> grid_;
  std::vector<double> log_weights_;
  std::vector<double> weights_;
  long long nu_used_;
};

Posterior update_posterior(Posterior post, int outcome, const LikelihoodTable& table);
/// Batched update: order-independent product of likelihood powers.
Posterior update_posterior_counts(Posterior post, std::span<const long long> counts,
                                  const LikelihoodTable& table);

struct EstimateReport {
  double mean = 0.0;
  double variance = 0.0;
  double bias = 0.0;
  long long nu = 0;
  double grid_spacing = 0.0;
  double variance_floor = 0.0;  // spacing^2 / 12, resolution limit of the grid
};

EstimateReport estimate(const Posterior& post, double delta_true);

/// Equal-tailed credible interval [lo, hi] holding `level` of the mass.
std::pair<double, double> credible_interval(const Posterior& post, double level);

/// CSV `delta,weight`.
void write_posterior_csv(const std::filesystem::path& path, const Posterior& post);

}  // namespace qsn
