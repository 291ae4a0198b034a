#pragma once

// Dark-matter sensing unitary. On one qubit
//   U_DM(delta, alpha) = [[cos d, i e^{-i a} sin d], [i e^{i a} sin d, cos d]]
//                      = cos d I + i sin d G,   G = cos a X + sin a Y,
// and V(delta, alpha) applies it to every qubit.

#include "qsn/sim.hpp"

namespace qsn {

struct DMInteraction {
  double delta = 0.05;  // accumulated phase, radians
  double alpha = 0.0;   // field phase offset, radians
};

Mat2 u_dm(double delta, double alpha);
/// Single-qubit generator G with G^2 = I.
Mat2 dm_generator(double alpha);

StateVector apply_v(const StateVector& state, const DMInteraction& dm);
void apply_v_inplace(Amplitudes& amps, int n_qubits, const DMInteraction& dm);

/// sum_k G_k |x>, G_k acting on qubit k.
Amplitudes apply_generator_sum(const Amplitudes& x, int n_qubits, double alpha);

/// d/d delta of V|prepared> = i (sum_k G_k) V |prepared>.
Amplitudes v_delta_derivative(const StateVector& prepared, const DMInteraction& dm);

struct BaselineProbability {
  double small_phase;  // N delta^2
  double exact;        // N sin^2 delta
};

/// Total excitation probability of N independent qubits.
BaselineProbability individual_baseline(int n, double delta);

}  // namespace qsn
