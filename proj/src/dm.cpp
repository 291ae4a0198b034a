#include "qsn/dm.hpp"

#include <cmath>

#include "qsn/errors.hpp"

namespace qsn {

namespace {
constexpr cplx kI{0.0, 1.0};

void check_finite(const DMInteraction& dm) {
  if (!std::isfinite(dm.delta) || !std::isfinite(dm.alpha)) {
    throw DomainError("delta and alpha must be finite");
  }
}
}  // namespace

Mat2 u_dm(double delta, double alpha) {
  const double c = std::cos(delta), s = std::sin(delta);
  Mat2 m;
  m << c, kI * std::exp(-kI * alpha) * s, kI * std::exp(kI * alpha) * s, c;
  return m;
}

Mat2 dm_generator(double alpha) {
  Mat2 g;
  g << 0, std::exp(-kI * alpha), std::exp(kI * alpha), 0;
  return g;
}

void apply_v_inplace(Amplitudes& amps, int n_qubits, const DMInteraction& dm) {
  check_finite(dm);
  const Mat2 u = u_dm(dm.delta, dm.alpha);
  for (int q = 0; q < n_qubits; ++q) apply_1q_inplace(as_span(amps), n_qubits, q, u);
}

StateVector apply_v(const StateVector& state, const DMInteraction& dm) {
  Amplitudes a = state.amplitudes();
  apply_v_inplace(a, state.n_qubits(), dm);
  return StateVector::trusted(state.n_qubits(), std::move(a));
}

Amplitudes apply_generator_sum(const Amplitudes& x, int n_qubits, double alpha) {
  const Mat2 g = dm_generator(alpha);
  Amplitudes out = Amplitudes::Zero(x.size());
  for (int q = 0; q < n_qubits; ++q) {
    Amplitudes term = x;
    apply_1q_inplace(as_span(term), n_qubits, q, g);
    out += term;
  }
  return out;
}

Amplitudes v_delta_derivative(const StateVector& prepared, const DMInteraction& dm) {
  Amplitudes a = prepared.amplitudes();
  apply_v_inplace(a, prepared.n_qubits(), dm);
  return kI * apply_generator_sum(a, prepared.n_qubits(), dm.alpha);
}

BaselineProbability individual_baseline(int n, double delta) {
  if (n < 1) throw ConfigError("qubit count must be positive");
  if (!std::isfinite(delta)) throw DomainError("delta must be finite");
  const double s = std::sin(delta);
  return {n * delta * delta, n * s * s};
}

}  // namespace qsn
