#pragma once

// Dense statevector and density-matrix simulation.
//
// Bit ordering: qubit 0 is the most significant bit of the basis index. For
// n qubits, qubit q corresponds to bit (n - 1 - q). Every module in the
// project uses this convention.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qsn {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
/// Unnormalized amplitude vector (derivatives, adjoint states, cotangents).
using Amplitudes = Eigen::VectorXcd;

inline constexpr double kNormTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kKrausTol = 1e-12;
inline constexpr double kProbSumTol = 1e-10;
inline constexpr int kMaxQubits = 12;

/// Bit mask of `qubit` in an n-qubit basis index.
inline std::size_t qubit_mask(int n_qubits, int qubit) {
  return std::size_t{1} << (n_qubits - 1 - qubit);
}

void check_qubit_count(int n);
void check_qubit_index(int n, int qubit);

// Raw in-place kernels. No validation; callers guarantee sizes and indices.
void apply_1q_inplace(std::span<cplx> amps, int n_qubits, int qubit, const Mat2& u);
void apply_cz_inplace(std::span<cplx> amps, int n_qubits, int i, int j);
inline std::span<cplx> as_span(Amplitudes& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

/// Pure N-qubit state with unit norm.
class StateVector {
 public:
  /// Validates length 2^n and unit norm within kNormTol.
  StateVector(int n_qubits, Amplitudes amplitudes);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  const Amplitudes& amplitudes() const { return amps_; }
  cplx operator[](std::size_t b) const { return amps_[static_cast<Eigen::Index>(b)]; }
  double norm() const { return amps_.norm(); }

  /// Wraps amplitudes produced by a unitary evolution of a valid state;
  /// skips the norm check.
  static StateVector trusted(int n_qubits, Amplitudes amplitudes);

 private:
  StateVector() = default;
  int n_qubits_ = 0;
  Amplitudes amps_;
};

/// 2^n x 2^n Hermitian, PSD, unit-trace operator.
class DensityMatrix {
 public:
  /// Validates Hermiticity, trace and PSD.
  DensityMatrix(int n_qubits, Eigen::MatrixXcd elements);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(rho_.rows()); }
  const Eigen::MatrixXcd& elements() const { return rho_; }
  cplx trace() const { return rho_.trace(); }
  double purity() const { return (rho_ * rho_).trace().real(); }

  static DensityMatrix trusted(int n_qubits, Eigen::MatrixXcd elements);

 private:
  DensityMatrix() = default;
  int n_qubits_ = 0;
  Eigen::MatrixXcd rho_;
};

/// Single-qubit Kraus operators satisfying sum K^dag K = I.
class KrausSet {
 public:
  explicit KrausSet(std::vector<Mat2> operators);
  const std::vector<Mat2>& operators() const { return ops_; }

 private:
  std::vector<Mat2> ops_;
};

bool is_unitary(const Mat2& u, double tol = kUnitaryTol);

StateVector init_ground(int n);
StateVector apply_1q(StateVector state, int qubit, const Mat2& u);
StateVector apply_cz(StateVector state, int i, int j);
DensityMatrix to_density(const StateVector& state);

/// Applies the channel on `qubit` to any 2^n x 2^n matrix (linear in its argument).
void apply_channel_inplace(Eigen::MatrixXcd& m, int n_qubits, int qubit, const KrausSet& kraus);
DensityMatrix apply_channel(const DensityMatrix& rho, int qubit, const KrausSet& kraus);

std::vector<double> basis_probabilities(const StateVector& state);
std::vector<double> basis_probabilities(const DensityMatrix& rho);

namespace gates {
Mat2 identity();
Mat2 pauli_x();
Mat2 pauli_y();
Mat2 pauli_z();
Mat2 hadamard();
}  // namespace gates

}  // namespace qsn
