#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qsn/bayes.hpp"
#include "qsn/errors.hpp"
#include "qsn/fisher.hpp"

using namespace qsn;

namespace {

const Topology kSingle("Q1", 1, {});
const AnsatzSpec kGround(kSingle, 0, {0.0, 0.0, 0.0});
const AnsatzSpec kReadout(kSingle, 0, {0.0, 0.0, 0.0}, true);

// Single qubit from |g>, read out in the computational basis:
// p(e | delta) = sin^2 delta, Fisher information 4.
LikelihoodTable single_qubit_table(std::vector<double> grid) {
  return likelihood_table(kGround, kReadout, 0.0, std::move(grid));
}

std::vector<double> single_qubit_probs(double delta) {
  return {std::pow(std::cos(delta), 2), std::pow(std::sin(delta), 2)};
}

}  // namespace

TEST_CASE("linspace") {
  const auto g = linspace(0.0, 0.15, 1001);
  CHECK(g.size() == 1001);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 0.15);
  CHECK(g[500] == doctest::Approx(0.075));
  CHECK_THROWS_AS(linspace(0.0, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(linspace(1.0, 1.0, 5), ConfigError);
}

TEST_CASE("likelihood rows are probability distributions") {
  std::mt19937_64 rng(51);
  const auto t = builtin("F4");
  const AnsatzSpec prep(t, 1, oracle::random_angles(rng, param_count(t, 1)));
  const AnsatzSpec meas(t, 1, oracle::random_angles(rng, param_count(t, 1)), true);
  const auto table = likelihood_table(prep, meas, 0.2, linspace(0.0, 0.15, 31));
  CHECK(table.n_outcomes() == 16);
  for (std::size_t g = 0; g < table.grid().size(); ++g) {
    double s = 0;
    for (double p : table.row(g)) {
      CHECK(p >= 0.0);
      s += p;
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("likelihood rows reproduce the measurement pipeline exactly") {
  std::mt19937_64 rng(52);
  const auto t = builtin("L4");
  const auto p = oracle::random_angles(rng, param_count(t, 1));
  const AnsatzSpec prep(t, 1, p);
  const AnsatzSpec inverse(t, 1, p, true);
  const auto table = likelihood_table(prep, inverse, 0.0, {0.0, 0.05, 0.1});
  CHECK(std::abs(table.at(0, 0) - 1.0) < 1e-12);
  const auto direct = measurement_probabilities(apply_ansatz(init_ground(4), prep), {0.05, 0.0}, inverse);
  for (int m = 0; m < 16; ++m) CHECK(table.at(1, m) == direct[static_cast<std::size_t>(m)]);
}

TEST_CASE("likelihood table validation") {
  CHECK_THROWS_AS(LikelihoodTable({0.0, 1.0}, 2, {0.5, 0.5, 1.0}), ConfigError);
  CHECK_THROWS_AS(LikelihoodTable({0.0, 1.0}, 2, {0.5, 0.5, 0.7, 0.7}), NumericError);
  CHECK_THROWS_AS(single_qubit_table({}), ConfigError);
}

TEST_CASE("sampling a point mass") {
  const std::vector<double> p{0.0, 1.0, 0.0};
  for (int o : sample_outcomes(p, 1000, 3)) CHECK(o == 1);
  CHECK_THROWS_AS(sample_outcomes(p, 0, 3), ConfigError);
  CHECK_THROWS_AS(sample_outcomes(std::vector<double>{0.5, 0.6}, 10, 3), NumericError);
}

TEST_CASE("sampling frequencies concentrate around the probabilities") {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  const int nu = 100000;
  const auto counts = outcome_counts(sample_outcomes(p, nu, 99), 4);
  for (std::size_t m = 0; m < p.size(); ++m) {
    const double sigma = std::sqrt(nu * p[m] * (1 - p[m]));
    CHECK(std::abs(static_cast<double>(counts[m]) - nu * p[m]) < 5 * sigma);
  }
}

TEST_CASE("sampling is deterministic in the seed") {
  const std::vector<double> p{0.3, 0.7};
  CHECK(sample_outcomes(p, 500, 17) == sample_outcomes(p, 500, 17));
  CHECK(sample_outcomes(p, 500, 17) != sample_outcomes(p, 500, 18));
}

TEST_CASE("outcome counts") {
  CHECK(outcome_counts(std::vector<int>{0, 2, 2, 1, 2}, 3) == std::vector<long long>{1, 1, 3});
  CHECK_THROWS_AS(outcome_counts(std::vector<int>{3}, 3), ConfigError);
}

TEST_CASE("posterior construction") {
  CHECK_THROWS_AS(Posterior({0.0, 0.0}, {1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(Posterior({0.0, 1.0}, {1.0}), ConfigError);
  CHECK_THROWS_AS(Posterior({0.0, 1.0}, {0.0, 0.0}), DegenerateLikelihoodError);
  CHECK_THROWS_AS(Posterior({0.0, 1.0}, {-1.0, 2.0}), NumericError);
  const Posterior p({0.0, 1.0, 2.0}, {1.0, 2.0, 1.0});
  CHECK(p.weights()[1] == doctest::Approx(0.5));
}

TEST_CASE("a flat likelihood leaves the posterior unchanged") {
  const LikelihoodTable flat({0.0, 0.5, 1.0}, 2, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  const Posterior prior({0.0, 0.5, 1.0}, {0.2, 0.5, 0.3});
  const auto post = update_posterior(prior, 1, flat);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(post.weights()[i] - prior.weights()[i]) < 1e-15);
  CHECK(post.nu_used() == 1);
}

TEST_CASE("sequential and batched updates agree") {
  const auto grid = linspace(0.0, 0.15, 101);
  const auto table = single_qubit_table(grid);
  const auto outcomes = sample_outcomes(single_qubit_probs(0.05), 200, 5);
  Posterior seq = Posterior::uniform(grid);
  for (int o : outcomes) seq = update_posterior(std::move(seq), o, table);
  const auto batch = update_posterior_counts(Posterior::uniform(grid), outcome_counts(outcomes, 2), table);
  CHECK(seq.nu_used() == 200);
  CHECK(batch.nu_used() == 200);
  double sum = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(seq.weights()[i] - batch.weights()[i]) < 1e-12);
    sum += seq.weights()[i];
  }
  CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("an impossible observation is a degenerate likelihood") {
  // Only delta = 0 carries mass and the excited outcome is impossible there.
  const auto table = single_qubit_table({0.0, 0.1});
  const Posterior point({0.0, 0.1}, {1.0, 0.0});
  CHECK_THROWS_AS(update_posterior(point, 1, table), DegenerateLikelihoodError);
  CHECK_THROWS_AS(update_posterior(point, 2, table), ConfigError);
  CHECK_THROWS_AS(update_posterior_counts(point, std::vector<long long>{-1, 0}, table), ConfigError);
  const auto other_grid = single_qubit_table({0.0, 0.2});
  CHECK_THROWS_AS(update_posterior(point, 0, other_grid), ConfigError);
}

TEST_CASE("estimates of simple posteriors") {
  const Posterior point({0.0, 0.05, 0.1}, {0.0, 1.0, 0.0});
  const auto r = estimate(point, 0.04);
  CHECK(r.mean == doctest::Approx(0.05));
  CHECK(r.variance == doctest::Approx(0.0));
  CHECK(r.bias == doctest::Approx(0.01));

  const int g = 1001;
  const auto u = estimate(Posterior::uniform(linspace(0.0, 0.15, g)), 0.05);
  CHECK(u.mean == doctest::Approx(0.075).epsilon(1e-12));
  // Discrete uniform variance h^2 (G^2 - 1) / 12 sits 2/(G-1) above 0.15^2/12.
  const double h = 0.15 / (g - 1);
  CHECK(u.variance == doctest::Approx(h * h * (double(g) * g - 1) / 12).epsilon(1e-12));
  CHECK(std::abs(u.variance - 1.875e-3) <= 1.875e-3 * 2.0 / (g - 1) * (1 + 1e-9));
  CHECK(u.grid_spacing == doctest::Approx(h));
  CHECK(u.variance_floor == doctest::Approx(h * h / 12));
}

TEST_CASE("credible intervals") {
  const Posterior point({0.0, 0.05, 0.1}, {0.0, 1.0, 0.0});
  CHECK(credible_interval(point, 0.95) == std::pair{0.05, 0.05});
  const auto [lo, hi] = credible_interval(Posterior::uniform(linspace(0.0, 1.0, 1001)), 0.5);
  CHECK(lo == doctest::Approx(0.25).epsilon(1e-2));
  CHECK(hi == doctest::Approx(0.75).epsilon(1e-2));
  CHECK_THROWS_AS(credible_interval(point, 1.0), DomainError);
  CHECK_THROWS_AS(credible_interval(point, 0.0), DomainError);
}

TEST_CASE("95% credible intervals cover the truth in most trials") {
  const auto grid = linspace(0.0, 0.15, 1001);
  const auto table = single_qubit_table(grid);
  const double truth = 0.05;
  int covered = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto counts = outcome_counts(sample_outcomes(single_qubit_probs(truth), 10000, 1000 + trial), 2);
    const auto post = update_posterior_counts(Posterior::uniform(grid), counts, table);
    const auto [lo, hi] = credible_interval(post, 0.95);
    if (lo <= truth && truth <= hi) ++covered;
  }
  CHECK(covered >= 90);
}

TEST_CASE("posterior concentrates: average bias and variance shrink with nu") {
  const auto grid = linspace(0.0, 0.15, 1001);
  const auto table = single_qubit_table(grid);
  const double truth = 0.05;
  double bias_small = 0, bias_large = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto outcomes = sample_outcomes(single_qubit_probs(truth), 10000, 500 + trial);
    const auto first = std::span(outcomes).first(100);
    const auto small = update_posterior_counts(Posterior::uniform(grid), outcome_counts(first, 2), table);
    const auto large = update_posterior_counts(Posterior::uniform(grid), outcome_counts(outcomes, 2), table);
    const auto rs = estimate(small, truth), rl = estimate(large, truth);
    bias_small += std::abs(rs.bias);
    bias_large += std::abs(rl.bias);
    // nu Var approaches the Cramer-Rao value 1/F = 1/4.
    CHECK(rl.variance * 10000 == doctest::Approx(0.25).epsilon(0.1));
    CHECK(rl.variance < rs.variance);
  }
  CHECK(bias_large < bias_small);
}

TEST_CASE("posterior CSV") {
  const auto dir = std::filesystem::temp_directory_path() / "qsn_bayes_test";
  const auto path = dir / "post.csv";
  write_posterior_csv(path, Posterior({0.0, 0.5}, {1.0, 3.0}));
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "delta,weight");
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, row)) {
    const auto comma = row.find(',');
    rows.emplace_back(std::stod(row.substr(0, comma)), std::stod(row.substr(comma + 1)));
  }
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].first == 0.5);
  CHECK(rows[0].second == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(rows[1].second == doctest::Approx(0.75).epsilon(1e-14));
  std::filesystem::remove_all(dir);
}
