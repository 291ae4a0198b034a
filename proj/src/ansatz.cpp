#include "qsn/ansatz.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "qsn/errors.hpp"

namespace qsn {

namespace {

constexpr cplx kI{0.0, 1.0};

Mat2 gate_matrix(const Gate& g, const std::vector<double>& params) {
  const double angle = g.sign * params[g.param];
  switch (g.kind) {
    case GateKind::Rx: return rx(angle);
    case GateKind::Ry: return ry(angle);
    case GateKind::Rz: return rz(angle);
    case GateKind::CZ: break;
  }
  return Mat2::Identity();
}

void apply_gate(std::span<cplx> amps, int n, const Gate& g, const std::vector<double>& params) {
  if (g.kind == GateKind::CZ) {
    apply_cz_inplace(amps, n, g.q0, g.q1);
  } else {
    apply_1q_inplace(amps, n, g.q0, gate_matrix(g, params));
  }
}

// Product of the rotations in a single-qubit block, in application order.
Mat2 block_matrix(const std::vector<Gate>& circuit, const GateBlock& b, const std::vector<double>& params) {
  Mat2 m = Mat2::Identity();
  for (std::size_t i = b.first; i < b.first + b.count; ++i) m = gate_matrix(circuit[i], params) * m;
  return m;
}

// T_ab = sum_rest conj(bra_{a,rest}) ket_{b,rest} on qubit q, so that
// <bra| M_q |ket> = sum_ab M_ab T_ab.
Mat2 transition_matrix(const Amplitudes& bra, const Amplitudes& ket, int n, int q) {
  const std::size_t mask = qubit_mask(n, q);
  const auto dim = static_cast<std::size_t>(ket.size());
  cplx t00 = 0.0, t01 = 0.0, t10 = 0.0, t11 = 0.0;
  for (std::size_t hi = 0; hi < dim; hi += 2 * mask) {
    for (std::size_t b = hi; b < hi + mask; ++b) {
      const cplx l0 = std::conj(bra[static_cast<Eigen::Index>(b)]);
      const cplx l1 = std::conj(bra[static_cast<Eigen::Index>(b | mask)]);
      const cplx k0 = ket[static_cast<Eigen::Index>(b)];
      const cplx k1 = ket[static_cast<Eigen::Index>(b | mask)];
      t00 += l0 * k0;
      t01 += l0 * k1;
      t10 += l1 * k0;
      t11 += l1 * k1;
    }
  }
  Mat2 t;
  t << t00, t01, t10, t11;
  return t;
}

void append_rotation_block(std::vector<Gate>& c, int q, std::size_t& next) {
  c.push_back({GateKind::Rx, q, -1, next++});
  c.push_back({GateKind::Ry, q, -1, next++});
  c.push_back({GateKind::Rz, q, -1, next++});
}

}  // namespace

Mat2 rx(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Mat2 m;
  m << c, -kI * s, -kI * s, c;
  return m;
}

Mat2 ry(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Mat2 m;
  m << c, -s, s, c;
  return m;
}

Mat2 rz(double theta) {
  Mat2 m;
  m << std::exp(-kI * (theta / 2)), 0, 0, std::exp(kI * (theta / 2));
  return m;
}

Mat2 rotation_axis(GateKind kind) {
  switch (kind) {
    case GateKind::Rx: return gates::pauli_x();
    case GateKind::Ry: return gates::pauli_y();
    case GateKind::Rz: return gates::pauli_z();
    case GateKind::CZ: break;
  }
  throw ConfigError("CZ has no rotation axis");
}

std::size_t param_count(const Topology& topology, int layers) {
  if (layers < 0) throw ConfigError("layer count must be non-negative");
  return 3 * static_cast<std::size_t>(topology.n_qubits()) +
         static_cast<std::size_t>(layers) * 6 * topology.edges().size();
}

std::vector<Gate> build_circuit(const Topology& topology, int layers, bool daggered) {
  std::vector<Gate> c;
  std::size_t next = 0;
  for (int q = 0; q < topology.n_qubits(); ++q) append_rotation_block(c, q, next);
  for (int l = 0; l < layers; ++l) {
    for (const auto& e : topology.edges()) {
      c.push_back({GateKind::CZ, e.a, e.b});
      append_rotation_block(c, e.a, next);
      append_rotation_block(c, e.b, next);
    }
  }
  if (daggered) {
    std::reverse(c.begin(), c.end());
    for (auto& g : c) {
      if (g.kind != GateKind::CZ) g.sign = -1.0;
    }
  }
  return c;
}

std::vector<double> deepen_params(const Topology& topology, std::span<const double> params, int from_layers,
                                  int to_layers) {
  if (params.size() != param_count(topology, from_layers)) throw ConfigError("parameter count mismatch");
  if (to_layers < from_layers) throw ConfigError("cannot embed into a shallower circuit");
  const auto n = static_cast<std::size_t>(topology.n_qubits());
  const std::size_t extra = static_cast<std::size_t>(to_layers - from_layers);
  if (extra == 0) return {params.begin(), params.end()};

  const std::size_t per_layer = 6 * topology.edges().size();
  std::vector<double> out(param_count(topology, to_layers), 0.0);
  // Offset of each qubit's last rotation block inside one layer; isolated
  // qubits keep their initial block.
  std::vector<std::size_t> last(n, 0);
  std::vector<bool> seen(n, false);
  std::size_t offset = 0;
  for (const auto& e : topology.edges()) {
    last[static_cast<std::size_t>(e.a)] = offset;
    last[static_cast<std::size_t>(e.b)] = offset + 3;
    seen[static_cast<std::size_t>(e.a)] = seen[static_cast<std::size_t>(e.b)] = true;
    offset += 6;
  }
  const std::size_t final_extra = 3 * n + (extra - 1) * per_layer;
  for (std::size_t q = 0; q < n; ++q) {
    const std::size_t dst = seen[q] ? final_extra + last[q] : 3 * q;
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(3 * q), 3, out.begin() + static_cast<std::ptrdiff_t>(dst));
  }
  std::copy(params.begin() + static_cast<std::ptrdiff_t>(3 * n), params.end(),
            out.begin() + static_cast<std::ptrdiff_t>(3 * n + extra * per_layer));
  return out;
}

AnsatzSpec::AnsatzSpec(Topology topology, int layers, std::vector<double> params, bool daggered)
    : topology_(std::move(topology)), layers_(layers), params_(std::move(params)), daggered_(daggered) {
  const std::size_t expected = param_count(topology_, layers_);
  if (params_.size() != expected) {
    throw ConfigError("ansatz on " + topology_.name() + " with " + std::to_string(layers_) +
                      " layers needs " + std::to_string(expected) + " parameters, got " +
                      std::to_string(params_.size()));
  }
  for (double p : params_) {
    if (!std::isfinite(p)) throw ConfigError("ansatz parameters must be finite");
  }
  circuit_ = build_circuit(topology_, layers_, daggered_);
  blocks_ = group_blocks(circuit_);
}

std::vector<GateBlock> group_blocks(const std::vector<Gate>& circuit) {
  std::vector<GateBlock> blocks;
  for (std::size_t i = 0; i < circuit.size(); ++i) {
    const Gate& g = circuit[i];
    if (g.kind != GateKind::CZ && !blocks.empty()) {
      GateBlock& last = blocks.back();
      const Gate& prev = circuit[last.first];
      if (prev.kind != GateKind::CZ && prev.q0 == g.q0 && last.first + last.count == i) {
        ++last.count;
        continue;
      }
    }
    blocks.push_back({i, 1});
  }
  return blocks;
}

AnsatzSpec AnsatzSpec::with_params(std::vector<double> params) const {
  return {topology_, layers_, std::move(params), daggered_};
}

AnsatzSpec AnsatzSpec::adjoint() const { return {topology_, layers_, params_, !daggered_}; }

void run_circuit(Amplitudes& amps, const AnsatzSpec& spec) {
  const int n = spec.n_qubits();
  const auto& circuit = spec.circuit();
  for (const auto& b : spec.blocks()) {
    const Gate& g = circuit[b.first];
    if (g.kind == GateKind::CZ) {
      apply_cz_inplace(as_span(amps), n, g.q0, g.q1);
    } else {
      apply_1q_inplace(as_span(amps), n, g.q0, block_matrix(circuit, b, spec.params()));
    }
  }
}

StateVector apply_ansatz(const StateVector& state, const AnsatzSpec& spec) {
  if (state.n_qubits() != spec.n_qubits()) {
    throw ConfigError("state has " + std::to_string(state.n_qubits()) + " qubits, ansatz expects " +
                      std::to_string(spec.n_qubits()));
  }
  Amplitudes a = state.amplitudes();
  run_circuit(a, spec);
  return StateVector::trusted(state.n_qubits(), std::move(a));
}

Amplitudes derivative_state(const StateVector& state, const AnsatzSpec& spec, std::size_t k) {
  if (k >= spec.params().size()) {
    throw ConfigError("parameter index " + std::to_string(k) + " out of range");
  }
  if (state.n_qubits() != spec.n_qubits()) throw ConfigError("state/ansatz qubit mismatch");
  const int n = spec.n_qubits();
  Amplitudes a = state.amplitudes();
  for (const auto& g : spec.circuit()) {
    apply_gate(as_span(a), n, g, spec.params());
    if (g.kind != GateKind::CZ && g.param == k) {
      // d/dt exp(-i s t sigma/2) = (-i s sigma / 2) exp(...)
      apply_1q_inplace(as_span(a), n, g.q0, rotation_axis(g.kind));
      a *= -kI * (g.sign / 2.0);
    }
  }
  return a;
}

std::vector<double> adjoint_gradient(const AnsatzSpec& spec, std::span<const Amplitudes> inputs,
                                     std::span<const Amplitudes> cotangents) {
  if (inputs.size() != cotangents.size()) throw ConfigError("inputs/cotangents size mismatch");
  const int n = spec.n_qubits();
  const auto dim = Eigen::Index{1} << n;
  std::vector<Amplitudes> psi(inputs.begin(), inputs.end());
  std::vector<Amplitudes> lam(cotangents.begin(), cotangents.end());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (psi[i].size() != dim || lam[i].size() != dim) throw ConfigError("vector length mismatch");
    run_circuit(psi[i], spec);
  }
  std::vector<double> grad(spec.params().size(), 0.0);
  const auto& circuit = spec.circuit();
  const auto& blocks = spec.blocks();
  for (auto bit = blocks.rbegin(); bit != blocks.rend(); ++bit) {
    const Gate& head = circuit[bit->first];
    if (head.kind == GateKind::CZ) {
      for (std::size_t i = 0; i < psi.size(); ++i) {
        apply_cz_inplace(as_span(psi[i]), n, head.q0, head.q1);
        apply_cz_inplace(as_span(lam[i]), n, head.q0, head.q1);
      }
      continue;
    }
    Mat2 t = Mat2::Zero();
    for (std::size_t i = 0; i < psi.size(); ++i) t += transition_matrix(lam[i], psi[i], n, head.q0);
    // Walk the block backwards. Re <lam| (-i s/2) sigma |psi> = (s/2) Im <lam|sigma|psi>;
    // undoing gate G on both vectors maps T -> G^T T conj(G).
    for (std::size_t k = bit->first + bit->count; k-- > bit->first;) {
      const Gate& g = circuit[k];
      const cplx elem = rotation_axis(g.kind).cwiseProduct(t).sum();
      grad[g.param] += 0.5 * g.sign * elem.imag();
      const Mat2 gm = gate_matrix(g, spec.params());
      t = gm.transpose() * t * gm.conjugate();
    }
    const Mat2 undo = block_matrix(circuit, *bit, spec.params()).adjoint();
    for (std::size_t i = 0; i < psi.size(); ++i) {
      apply_1q_inplace(as_span(psi[i]), n, head.q0, undo);
      apply_1q_inplace(as_span(lam[i]), n, head.q0, undo);
    }
  }
  return grad;
}

StateVector ghz_state(int n) {
  check_qubit_count(n);
  Amplitudes a = Amplitudes::Zero(Eigen::Index{1} << n);
  a[0] = a[a.size() - 1] = 1.0 / std::sqrt(2.0);
  return {n, std::move(a)};
}

StateVector excited_state(int n) {
  check_qubit_count(n);
  Amplitudes a = Amplitudes::Zero(Eigen::Index{1} << n);
  a[a.size() - 1] = 1.0;
  return {n, std::move(a)};
}

StateVector optimal_state(int n, double alpha) {
  check_qubit_count(n);
  // |psi+>^n + |psi->^n: amplitude of basis b with k excitations is
  // 2^{-n/2} e^{i k alpha} (1 + (-1)^k); overall factor 1/sqrt(2).
  const auto dim = Eigen::Index{1} << n;
  Amplitudes a(dim);
  const double scale = std::pow(2.0, -0.5 * n) / std::sqrt(2.0);
  for (Eigen::Index b = 0; b < dim; ++b) {
    const int k = std::popcount(static_cast<unsigned>(b));
    const double sign_sum = (k % 2 == 0) ? 2.0 : 0.0;
    a[b] = scale * sign_sum * std::exp(kI * (k * alpha));
  }
  return {n, std::move(a)};
}

}  // namespace qsn
