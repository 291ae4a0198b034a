#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qsn/ansatz.hpp"
#include "qsn/errors.hpp"

using namespace qsn;

namespace {

const Topology kSingle("Q1", 1, {});

double max_diff(const Amplitudes& a, const Amplitudes& b) { return (a - b).cwiseAbs().maxCoeff(); }

Amplitudes run(const AnsatzSpec& spec) { return apply_ansatz(init_ground(spec.n_qubits()), spec).amplitudes(); }

}  // namespace

TEST_CASE("parameter counts") {
  CHECK(param_count(builtin("L4"), 1) == 30);
  CHECK(param_count(builtin("F4"), 1) == 48);
  CHECK(param_count(builtin("F4"), 2) == 84);
  CHECK(param_count(builtin("F9"), 2) == 27 + 2 * 216);
  CHECK(param_count(kSingle, 3) == 3);
  CHECK_THROWS_AS(param_count(builtin("L4"), -1), ConfigError);
}

TEST_CASE("rotation matrices follow exp(-i t sigma / 2)") {
  for (double t : {-2.0, 0.3, 1.7, std::numbers::pi}) {
    CHECK((rx(t) - oracle::rotation('x', t)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((ry(t) - oracle::rotation('y', t)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((rz(t) - oracle::rotation('z', t)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("zero parameters leave the ground state untouched") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const auto t = builtin(name);
    const AnsatzSpec spec(t, 1, std::vector<double>(param_count(t, 1), 0.0));
    CHECK(max_diff(run(spec), init_ground(t.n_qubits()).amplitudes()) == 0.0);
  }
}

TEST_CASE("single-qubit Rx(pi) sends |g> to -i|e>") {
  const AnsatzSpec spec(kSingle, 0, {std::numbers::pi, 0.0, 0.0});
  Amplitudes expect(2);
  expect << 0.0, cplx(0.0, -1.0);
  CHECK(max_diff(run(spec), expect) < 1e-15);
}

TEST_CASE("circuit matches the dense unitary oracle") {
  std::mt19937_64 rng(11);
  for (const char* name : {"L4", "R4", "S4", "F4"}) {
    for (int layers : {0, 1, 2}) {
      CAPTURE(name);
      CAPTURE(layers);
      const auto t = builtin(name);
      const auto p = oracle::random_angles(rng, param_count(t, layers));
      const oracle::Mat u = oracle::ansatz_unitary(t, layers, p);
      CHECK(max_diff(run(AnsatzSpec(t, layers, p)), u.col(0)) < 1e-13);
      // Daggered structure is U^dag applied to any state.
      const oracle::Vec psi = oracle::random_state(rng, 4);
      const auto back = apply_ansatz(StateVector(4, psi), AnsatzSpec(t, layers, p, true));
      CHECK(max_diff(back.amplitudes(), u.adjoint() * psi) < 1e-13);
    }
  }
}

TEST_CASE("preparation followed by its dagger is the identity") {
  std::mt19937_64 rng(12);
  for (const auto& name : builtin_names()) {
    const auto t = builtin(name);
    for (int draw = 0; draw < 50; ++draw) {
      const AnsatzSpec spec(t, 1, oracle::random_angles(rng, param_count(t, 1)));
      const auto out = apply_ansatz(apply_ansatz(init_ground(t.n_qubits()), spec), spec.adjoint());
      CHECK(max_diff(out.amplitudes(), init_ground(t.n_qubits()).amplitudes()) < 1e-12);
    }
  }
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(AnsatzSpec(builtin("L4"), 1, std::vector<double>(29, 0.0)), ConfigError);
  auto p = std::vector<double>(30, 0.0);
  p[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(AnsatzSpec(builtin("L4"), 1, p), ConfigError);
  CHECK_THROWS_AS(apply_ansatz(init_ground(3), AnsatzSpec(builtin("L4"), 1, std::vector<double>(30, 0.0))),
                  ConfigError);
}

TEST_CASE("derivative of Rx at zero") {
  const AnsatzSpec spec(kSingle, 0, {0.0, 0.0, 0.0});
  Amplitudes expect(2);
  expect << 0.0, cplx(0.0, -0.5);
  CHECK(max_diff(derivative_state(init_ground(1), spec, 0), expect) < 1e-15);
  CHECK_THROWS_AS(derivative_state(init_ground(1), spec, 3), ConfigError);
}

TEST_CASE("derivative states agree with central differences") {
  std::mt19937_64 rng(13);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const char* name = trial % 2 ? "F4" : "R4";
    const auto t = builtin(name);
    const int layers = 1 + trial % 2;
    const bool dag = trial % 3 == 0;
    const auto p = oracle::random_angles(rng, param_count(t, layers));
    const StateVector in(4, oracle::random_state(rng, 4));
    const std::size_t k = static_cast<std::size_t>(trial * 7) % p.size();
    const auto fd = oracle::central_diff_vec(
        [&](double x) {
          auto q = p;
          q[k] = x;
          return oracle::Vec(apply_ansatz(in, AnsatzSpec(t, layers, q, dag)).amplitudes());
        },
        p[k], h);
    CHECK(max_diff(derivative_state(in, AnsatzSpec(t, layers, p, dag), k), fd) < 1e-8);
  }
}

TEST_CASE("derivative is orthogonal-in-phase to the state") {
  std::mt19937_64 rng(14);
  const auto t = builtin("S4");
  const AnsatzSpec spec(t, 2, oracle::random_angles(rng, param_count(t, 2)));
  const auto psi = run(spec);
  for (std::size_t k = 0; k < spec.params().size(); k += 5) {
    CHECK(std::abs(psi.dot(derivative_state(init_ground(4), spec, k)).real()) < 1e-12);
  }
}

TEST_CASE("adjoint gradient equals generator insertion") {
  std::mt19937_64 rng(15);
  for (bool dag : {false, true}) {
    const auto t = builtin("F4");
    const AnsatzSpec spec(t, 2, oracle::random_angles(rng, param_count(t, 2)), dag);
    const std::vector<Amplitudes> in{oracle::random_state(rng, 4), oracle::random_state(rng, 4)};
    const std::vector<Amplitudes> cot{oracle::random_state(rng, 4) * 3.0, oracle::random_state(rng, 4)};
    const auto g = adjoint_gradient(spec, in, cot);
    REQUIRE(g.size() == spec.params().size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      double expect = 0;
      for (std::size_t i = 0; i < in.size(); ++i) {
        expect += cot[i].dot(derivative_state(StateVector(4, in[i]), spec, k)).real();
      }
      CHECK(std::abs(g[k] - expect) < 1e-12);
    }
  }
}

TEST_CASE("parameters are 2 pi periodic up to global phase") {
  std::mt19937_64 rng(16);
  const auto t = builtin("L4");
  auto p = oracle::random_angles(rng, param_count(t, 1));
  const auto a = run(AnsatzSpec(t, 1, p));
  for (std::size_t k = 0; k < p.size(); k += 4) {
    auto q = p;
    q[k] += 2 * std::numbers::pi;
    CHECK(std::abs(std::abs(a.dot(run(AnsatzSpec(t, 1, q)))) - 1.0) < 1e-12);
  }
}

TEST_CASE("deepened parameters prepare the same state") {
  std::mt19937_64 rng(17);
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const auto t = builtin(name);
    const auto p = oracle::random_angles(rng, param_count(t, 1));
    const auto a = run(AnsatzSpec(t, 1, p));
    for (int to : {1, 2, 3}) {
      const auto q = deepen_params(t, p, 1, to);
      CHECK(max_diff(run(AnsatzSpec(t, to, q)), a) < 1e-14);
    }
  }
  const Topology with_isolated("iso", 3, {{0, 1}});
  const auto p = oracle::random_angles(rng, param_count(with_isolated, 1));
  CHECK(max_diff(run(AnsatzSpec(with_isolated, 2, deepen_params(with_isolated, p, 1, 2))),
                 run(AnsatzSpec(with_isolated, 1, p))) < 1e-14);
  CHECK_THROWS_AS(deepen_params(builtin("L4"), p, 1, 2), ConfigError);
  CHECK_THROWS_AS(deepen_params(with_isolated, p, 1, 0), ConfigError);
}

TEST_CASE("reference probes") {
  const auto ghz = ghz_state(2);
  CHECK(std::abs(ghz[0] - std::sqrt(0.5)) < 1e-15);
  CHECK(std::abs(ghz[3] - std::sqrt(0.5)) < 1e-15);
  CHECK(std::abs(ghz[1]) == 0.0);
  CHECK(excited_state(2)[3] == cplx(1.0));
  const auto opt1 = optimal_state(1, 0.0);
  CHECK(std::abs(opt1[0] - 1.0) < 1e-15);
  CHECK(std::abs(opt1[1]) < 1e-15);
  for (int n = 1; n <= 9; ++n) {
    for (double a : {0.0, 0.4, std::numbers::pi / 2}) CHECK(std::abs(optimal_state(n, a).norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("optimal probe matches its defining superposition") {
  for (int n : {2, 3, 4}) {
    const double a = 0.7;
    oracle::Vec plus(2), minus(2);
    plus << 1, std::exp(oracle::I * a);
    minus << 1, -std::exp(oracle::I * a);
    plus /= std::sqrt(2.0);
    minus /= std::sqrt(2.0);
    oracle::Mat p = oracle::Mat::Identity(1, 1), m = p;
    for (int k = 0; k < n; ++k) {
      p = oracle::kron(p, plus);
      m = oracle::kron(m, minus);
    }
    const oracle::Vec expect = ((p + m).col(0)).normalized();
    CHECK(max_diff(optimal_state(n, a).amplitudes(), expect) < 1e-14);
  }
}
