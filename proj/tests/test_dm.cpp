#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qsn/ansatz.hpp"
#include "qsn/dm.hpp"
#include "qsn/errors.hpp"

using namespace qsn;

namespace {

double max_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("U_DM at zero phase is the identity") {
  for (double a : {0.0, 0.3, std::numbers::pi}) CHECK(max_diff(u_dm(0.0, a), Mat2::Identity()) == 0.0);
}

TEST_CASE("U_DM at a quarter turn") {
  Mat2 expect;
  expect << 0, cplx(0, 1), cplx(0, 1), 0;
  CHECK(max_diff(u_dm(std::numbers::pi / 2, 0.0), expect) < 1e-15);
}

TEST_CASE("U_DM is unitary and composes additively in delta") {
  for (double d = -3.0; d <= 3.0; d += 0.25) {
    for (double a = 0.0; a < 6.3; a += 0.5) {
      CHECK(is_unitary(u_dm(d, a), 1e-14));
      CHECK(max_diff(u_dm(d, a), oracle::dm_single(d, a)) < 1e-15);
      CHECK(max_diff(u_dm(d, a) * u_dm(0.37, a), u_dm(d + 0.37, a)) < 1e-14);
    }
  }
}

TEST_CASE("generator squares to one and builds U_DM") {
  for (double a : {0.0, 0.9, 2.5}) {
    const Mat2 g = dm_generator(a);
    CHECK(max_diff(g * g, Mat2::Identity()) < 1e-15);
    CHECK(max_diff(g, g.adjoint()) == 0.0);
    const double d = 0.42;
    CHECK(max_diff(std::cos(d) * Mat2::Identity() + cplx(0, 1) * std::sin(d) * g, u_dm(d, a)) < 1e-15);
  }
}

TEST_CASE("V matches the Kronecker oracle") {
  std::mt19937_64 rng(21);
  for (int n : {1, 2, 4, 6}) {
    const oracle::Vec psi = oracle::random_state(rng, n);
    const DMInteraction dm{0.31, 1.1};
    const auto out = apply_v(StateVector(n, psi), dm);
    CHECK(max_diff(out.amplitudes(), oracle::dm_full(n, dm.delta, dm.alpha) * psi) < 1e-14);
  }
}

TEST_CASE("V on the ground state excites every qubit independently") {
  for (int n : {1, 3, 4}) {
    const double d = 0.05;
    const auto out = apply_v(init_ground(n), {d, 0.3});
    const double all_excited = std::norm(out[out.dim() - 1]);
    CHECK(std::abs(all_excited - std::pow(std::sin(d), 2 * n)) < 1e-15);
    CHECK(std::abs(std::norm(out[0]) - std::pow(std::cos(d), 2 * n)) < 1e-15);
  }
}

TEST_CASE("V with zero phase does nothing") {
  std::mt19937_64 rng(22);
  const StateVector psi(3, oracle::random_state(rng, 3));
  CHECK(max_diff(apply_v(psi, {0.0, 0.8}).amplitudes(), psi.amplitudes()) == 0.0);
}

TEST_CASE("non-finite phases are domain errors") {
  CHECK_THROWS_AS(apply_v(init_ground(2), {std::numeric_limits<double>::infinity(), 0.0}), DomainError);
  CHECK_THROWS_AS(apply_v(init_ground(2), {0.1, std::numeric_limits<double>::quiet_NaN()}), DomainError);
}

TEST_CASE("generator sum matches the dense operator") {
  std::mt19937_64 rng(23);
  const oracle::Vec x = oracle::random_state(rng, 4) * 2.0;
  CHECK(max_diff(apply_generator_sum(x, 4, 0.6), oracle::generator_sum(4, 0.6) * x) < 1e-14);
}

TEST_CASE("single-qubit derivative example") {
  Amplitudes expect(2);
  expect << 0.0, cplx(0.0, 1.0);
  CHECK(max_diff(v_delta_derivative(init_ground(1), {0.0, 0.0}), expect) < 1e-15);
}

TEST_CASE("delta derivative agrees with central differences") {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 4;
    const StateVector psi(n, oracle::random_state(rng, n));
    const DMInteraction dm{u(rng), 3 * u(rng)};
    const auto fd = oracle::central_diff_vec(
        [&](double d) { return oracle::Vec(apply_v(psi, {d, dm.alpha}).amplitudes()); }, dm.delta, 1e-6);
    const auto exact = v_delta_derivative(psi, dm);
    CHECK(max_diff(exact, fd) < 1e-8);
    // Normalization makes the overlap purely imaginary.
    CHECK(std::abs(apply_v(psi, dm).amplitudes().dot(exact).real()) < 1e-13);
  }
}

TEST_CASE("individual-qubit baseline") {
  const auto b = individual_baseline(4, 0.05);
  CHECK(b.small_phase == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(b.exact == doctest::Approx(4 * std::pow(std::sin(0.05), 2)).epsilon(1e-14));
  CHECK(individual_baseline(9, 0.05).small_phase == doctest::Approx(0.0225).epsilon(1e-14));
  for (int n = 1; n <= 9; ++n) {
    CHECK(individual_baseline(n, 0.0).small_phase == 0.0);
    CHECK(individual_baseline(n, 0.0).exact == 0.0);
  }
  CHECK(b.exact < b.small_phase);
}
