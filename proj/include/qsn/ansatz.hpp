#pragma once

// Variational circuits built from a network topology.
//
// Preparation circuit U(theta):
//   1. a rotation block on every qubit, in qubit order;
//   2. for each layer, for each edge (i, j) in canonical order:
//      CZ(i, j), then a rotation block on i, then one on j.
// A rotation block is U_rot = Rz(tz) Ry(ty) Rx(tx): Rx acts first. Its three
// parameters are stored consecutively as (tx, ty, tz).
// R_a(t) = exp(-i t sigma_a / 2).
//
// The daggered circuit is the exact adjoint: gates in reverse order, each
// rotation angle negated. Measurement circuits M(mu) use it with their own
// parameter vector.

#include <cstddef>
#include <span>
#include <vector>

#include "qsn/sim.hpp"
#include "qsn/topology.hpp"

namespace qsn {

enum class GateKind { Rx, Ry, Rz, CZ };

struct Gate {
  GateKind kind;
  int q0;
  int q1 = -1;             // CZ partner
  std::size_t param = 0;   // rotations only
  double sign = 1.0;       // -1 for daggered rotations
};

Mat2 rx(double theta);
Mat2 ry(double theta);
Mat2 rz(double theta);
/// Pauli matrix generating a rotation kind.
Mat2 rotation_axis(GateKind kind);

std::size_t param_count(const Topology& topology, int layers);

/// Flat gate list of the preparation (or daggered) circuit.
std::vector<Gate> build_circuit(const Topology& topology, int layers, bool daggered);

/// Consecutive gate run that executes as one pass over the state: either a
/// single CZ or up to three rotations on one qubit.
struct GateBlock {
  std::size_t first = 0;  // index into the flat gate list
  std::size_t count = 0;
};
std::vector<GateBlock> group_blocks(const std::vector<Gate>& circuit);

/// Parameters of a `to_layers` circuit that prepares exactly the same state
/// from |0...0> as `params` does with `from_layers`. The leading extra layers
/// act on |0...0> with zero rotations, where every CZ is trivial; the last
/// rotation block of each qubit in the final extra layer then re-creates the
/// shallow circuit's initial block.
std::vector<double> deepen_params(const Topology& topology, std::span<const double> params, int from_layers,
                                  int to_layers);

class AnsatzSpec {
 public:
  AnsatzSpec(Topology topology, int layers, std::vector<double> params, bool daggered = false);

  const Topology& topology() const { return topology_; }
  int layers() const { return layers_; }
  const std::vector<double>& params() const { return params_; }
  bool daggered() const { return daggered_; }
  int n_qubits() const { return topology_.n_qubits(); }
  const std::vector<Gate>& circuit() const { return circuit_; }
  const std::vector<GateBlock>& blocks() const { return blocks_; }

  AnsatzSpec with_params(std::vector<double> params) const;
  /// Same topology, layers and parameters with the daggered flag flipped.
  AnsatzSpec adjoint() const;

 private:
  Topology topology_;
  int layers_;
  std::vector<double> params_;
  bool daggered_;
  std::vector<Gate> circuit_;
  std::vector<GateBlock> blocks_;
};

/// Runs the circuit in place on an arbitrary (not necessarily normalized) vector.
void run_circuit(Amplitudes& amps, const AnsatzSpec& spec);

StateVector apply_ansatz(const StateVector& state, const AnsatzSpec& spec);

/// d/d theta_k of U(theta)|state>, by inserting the rotation generator at gate k.
Amplitudes derivative_state(const StateVector& state, const AnsatzSpec& spec, std::size_t k);

/// Reverse-mode sweep: for output |out_i> = U(theta)|in_i>, returns
///   g_k = sum_i Re <cot_i | d out_i / d theta_k>
/// for every parameter, at the cost of a few circuit passes.
std::vector<double> adjoint_gradient(const AnsatzSpec& spec, std::span<const Amplitudes> inputs,
                                     std::span<const Amplitudes> cotangents);

StateVector ghz_state(int n);
StateVector excited_state(int n);
/// (|psi+>^n + |psi->^n)/sqrt(2), |psi+-> = (|g> +- e^{i alpha}|e>)/sqrt(2).
StateVector optimal_state(int n, double alpha);

}  // namespace qsn
