#include "qsn/sim.hpp"

#include <cmath>
#include <string>

#include "qsn/errors.hpp"

namespace qsn {

void check_qubit_count(int n) {
  if (n < 1 || n > kMaxQubits) {
    throw ConfigError("qubit count " + std::to_string(n) + " outside [1, " +
                      std::to_string(kMaxQubits) + "]");
  }
}

void check_qubit_index(int n, int qubit) {
  if (qubit < 0 || qubit >= n) {
    throw ConfigError("qubit index " + std::to_string(qubit) + " out of range for " +
                      std::to_string(n) + " qubits");
  }
}

void apply_1q_inplace(std::span<cplx> amps, int n_qubits, int qubit, const Mat2& u) {
  const std::size_t mask = qubit_mask(n_qubits, qubit);
  const cplx u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  const std::size_t dim = amps.size();
  for (std::size_t hi = 0; hi < dim; hi += 2 * mask) {
    for (std::size_t b = hi; b < hi + mask; ++b) {
      const cplx a0 = amps[b];
      const cplx a1 = amps[b | mask];
      amps[b] = u00 * a0 + u01 * a1;
      amps[b | mask] = u10 * a0 + u11 * a1;
    }
  }
}

void apply_cz_inplace(std::span<cplx> amps, int n_qubits, int i, int j) {
  const std::size_t both = qubit_mask(n_qubits, i) | qubit_mask(n_qubits, j);
  for (std::size_t b = 0; b < amps.size(); ++b) {
    if ((b & both) == both) amps[b] = -amps[b];
  }
}

StateVector::StateVector(int n_qubits, Amplitudes amplitudes) {
  check_qubit_count(n_qubits);
  if (amplitudes.size() != (Eigen::Index{1} << n_qubits)) {
    throw ConfigError("amplitude vector length " + std::to_string(amplitudes.size()) +
                      " does not match 2^" + std::to_string(n_qubits));
  }
  const double norm = amplitudes.norm();
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > kNormTol) {
    throw NumericError("state vector is not normalized (norm " + std::to_string(norm) + ")");
  }
  n_qubits_ = n_qubits;
  amps_ = std::move(amplitudes);
}

StateVector StateVector::trusted(int n_qubits, Amplitudes amplitudes) {
  StateVector s;
  s.n_qubits_ = n_qubits;
  s.amps_ = std::move(amplitudes);
  return s;
}

DensityMatrix::DensityMatrix(int n_qubits, Eigen::MatrixXcd elements) {
  check_qubit_count(n_qubits);
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  if (elements.rows() != dim || elements.cols() != dim) {
    throw ConfigError("density matrix shape does not match 2^" + std::to_string(n_qubits));
  }
  if ((elements - elements.adjoint()).cwiseAbs().maxCoeff() > kNormTol) {
    throw NumericError("density matrix is not Hermitian");
  }
  if (std::abs(elements.trace() - cplx{1.0, 0.0}) > kNormTol) {
    throw NumericError("density matrix trace is not 1");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(elements, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kPsdTol) {
    throw NumericError("density matrix has a negative eigenvalue");
  }
  n_qubits_ = n_qubits;
  rho_ = std::move(elements);
}

DensityMatrix DensityMatrix::trusted(int n_qubits, Eigen::MatrixXcd elements) {
  DensityMatrix d;
  d.n_qubits_ = n_qubits;
  d.rho_ = std::move(elements);
  return d;
}

KrausSet::KrausSet(std::vector<Mat2> operators) : ops_(std::move(operators)) {
  if (ops_.empty()) throw NumericError("empty Kraus set");
  Mat2 sum = Mat2::Zero();
  for (const auto& k : ops_) sum += k.adjoint() * k;
  if ((sum - Mat2::Identity()).cwiseAbs().maxCoeff() > kKrausTol) {
    throw NumericError("Kraus operators do not satisfy completeness");
  }
}

bool is_unitary(const Mat2& u, double tol) {
  return u.allFinite() && (u.adjoint() * u - Mat2::Identity()).cwiseAbs().maxCoeff() <= tol;
}

StateVector init_ground(int n) {
  check_qubit_count(n);
  Amplitudes a = Amplitudes::Zero(Eigen::Index{1} << n);
  a[0] = 1.0;
  return StateVector::trusted(n, std::move(a));
}

StateVector apply_1q(StateVector state, int qubit, const Mat2& u) {
  check_qubit_index(state.n_qubits(), qubit);
  if (!is_unitary(u)) throw NumericError("single-qubit gate is not unitary");
  Amplitudes a = state.amplitudes();
  apply_1q_inplace(as_span(a), state.n_qubits(), qubit, u);
  return StateVector::trusted(state.n_qubits(), std::move(a));
}

StateVector apply_cz(StateVector state, int i, int j) {
  check_qubit_index(state.n_qubits(), i);
  check_qubit_index(state.n_qubits(), j);
  if (i == j) throw ConfigError("CZ requires two distinct qubits");
  Amplitudes a = state.amplitudes();
  apply_cz_inplace(as_span(a), state.n_qubits(), i, j);
  return StateVector::trusted(state.n_qubits(), std::move(a));
}

DensityMatrix to_density(const StateVector& state) {
  const Amplitudes& a = state.amplitudes();
  return DensityMatrix::trusted(state.n_qubits(), a * a.adjoint());
}

void apply_channel_inplace(Eigen::MatrixXcd& m, int n_qubits, int qubit, const KrausSet& kraus) {
  const auto rows_apply = [&](Eigen::MatrixXcd& x, const Mat2& k) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      apply_1q_inplace({x.col(c).data(), static_cast<std::size_t>(x.rows())}, n_qubits, qubit, k);
    }
  };
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m.rows(), m.cols());
  for (const auto& k : kraus.operators()) {
    // K m K^dag = (K (K m)^dag)^dag
    Eigen::MatrixXcd left = m;
    rows_apply(left, k);
    Eigen::MatrixXcd both = left.adjoint();
    rows_apply(both, k);
    out += both.adjoint();
  }
  m = std::move(out);
}

DensityMatrix apply_channel(const DensityMatrix& rho, int qubit, const KrausSet& kraus) {
  check_qubit_index(rho.n_qubits(), qubit);
  Eigen::MatrixXcd m = rho.elements();
  apply_channel_inplace(m, rho.n_qubits(), qubit, kraus);
  return DensityMatrix::trusted(rho.n_qubits(), std::move(m));
}

std::vector<double> basis_probabilities(const StateVector& state) {
  std::vector<double> p(state.dim());
  for (std::size_t b = 0; b < p.size(); ++b) p[b] = std::norm(state[b]);
  return p;
}

std::vector<double> basis_probabilities(const DensityMatrix& rho) {
  std::vector<double> p(rho.dim());
  const auto& m = rho.elements();
  for (std::size_t b = 0; b < p.size(); ++b) {
    const auto i = static_cast<Eigen::Index>(b);
    p[b] = m(i, i).real();
  }
  return p;
}

namespace gates {

Mat2 identity() { return Mat2::Identity(); }

Mat2 pauli_x() {
  Mat2 m;
  m << 0, 1, 1, 0;
  return m;
}

Mat2 pauli_y() {
  Mat2 m;
  m << 0, cplx{0, -1}, cplx{0, 1}, 0;
  return m;
}

Mat2 pauli_z() {
  Mat2 m;
  m << 1, 0, 0, -1;
  return m;
}

Mat2 hadamard() {
  const double r = 1.0 / std::sqrt(2.0);
  Mat2 m;
  m << r, r, r, -r;
  return m;
}

}  // namespace gates

}  // namespace qsn
