#include "qsn/fisher.hpp"

#include <cmath>
#include <numeric>

#include "qsn/errors.hpp"

namespace qsn {

namespace {
constexpr double kClampTol = 1e-10;
constexpr double kDerivSumTol = 1e-8;

double clamp_info(double q) {
  if (q < 0.0 && q >= -kClampTol) return 0.0;
  if (q < 0.0) throw NumericError("negative Fisher information " + std::to_string(q));
  return q;
}

double bound_of(double info) {
  return info > 0.0 ? 1.0 / info : std::numeric_limits<double>::infinity();
}
}  // namespace

double qfi_pure(const StateVector& psi, const Amplitudes& dpsi) {
  if (dpsi.size() != psi.amplitudes().size()) throw ConfigError("derivative length mismatch");
  if (std::abs(psi.norm() - 1.0) > kClampTol) throw NumericError("probe is not normalized");
  const cplx overlap = psi.amplitudes().dot(dpsi);  // conjugates the left operand
  return clamp_info(4.0 * (dpsi.squaredNorm() - std::norm(overlap)));
}

double qfi_mixed(const DensityMatrix& rho, const Eigen::MatrixXcd& drho, double eig_tol) {
  const auto& m = rho.elements();
  if (drho.rows() != m.rows() || drho.cols() != m.cols()) throw ConfigError("drho shape mismatch");
  if ((drho - drho.adjoint()).cwiseAbs().maxCoeff() > kClampTol) {
    throw NumericError("density-matrix derivative is not Hermitian");
  }
  if (std::abs(drho.trace()) > kClampTol) throw NumericError("density-matrix derivative has nonzero trace");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  const Eigen::VectorXd& lam = es.eigenvalues();
  const Eigen::MatrixXcd& vecs = es.eigenvectors();
  const Eigen::MatrixXcd d = vecs.adjoint() * drho * vecs;
  double q = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    for (Eigen::Index j = 0; j < lam.size(); ++j) {
      const double s = lam[i] + lam[j];
      if (s > eig_tol) q += 2.0 * std::norm(d(i, j)) / s;
    }
  }
  return clamp_info(q);
}

double cfi(std::span<const double> probs, std::span<const double> dprobs, double p_floor) {
  if (probs.size() != dprobs.size()) throw ConfigError("probability/derivative length mismatch");
  double psum = 0.0, dsum = 0.0;
  for (std::size_t m = 0; m < probs.size(); ++m) {
    if (probs[m] < -kProbFloor || !std::isfinite(probs[m])) {
      throw NumericError("negative probability at outcome " + std::to_string(m));
    }
    psum += probs[m];
    dsum += dprobs[m];
  }
  if (std::abs(psum - 1.0) > kProbSumTol) throw NumericError("probabilities do not sum to 1");
  if (std::abs(dsum) > kDerivSumTol) throw NumericError("probability derivatives do not sum to 0");
  double f = 0.0;
  for (std::size_t m = 0; m < probs.size(); ++m) {
    if (probs[m] >= p_floor) f += dprobs[m] * dprobs[m] / probs[m];
  }
  return f;
}

double crb(int nu, double info) {
  if (!(info > 0.0)) throw DomainError("Fisher information must be positive");
  if (nu < 1) throw DomainError("measurement count must be positive");
  return 1.0 / (static_cast<double>(nu) * info);
}

double probe_qfi(const StateVector& probe, const DMInteraction& dm) {
  return qfi_pure(apply_v(probe, dm), v_delta_derivative(probe, dm));
}

std::vector<double> measurement_probabilities(const StateVector& prepared, const DMInteraction& dm,
                                              const AnsatzSpec& meas) {
  return basis_probabilities(apply_ansatz(apply_v(prepared, dm), meas));
}

std::vector<double> dprobs_wrt_delta(const StateVector& prepared, const DMInteraction& dm,
                                     const AnsatzSpec& meas) {
  if (prepared.n_qubits() != meas.n_qubits()) throw ConfigError("state/measurement qubit mismatch");
  Amplitudes a = prepared.amplitudes();
  apply_v_inplace(a, prepared.n_qubits(), dm);
  Amplitudes b = v_delta_derivative(prepared, dm);
  run_circuit(a, meas);
  run_circuit(b, meas);
  std::vector<double> dp(static_cast<std::size_t>(a.size()));
  for (Eigen::Index m = 0; m < a.size(); ++m) {
    dp[static_cast<std::size_t>(m)] = 2.0 * (std::conj(a[m]) * b[m]).real();
  }
  return dp;
}

double measurement_cfi(const StateVector& prepared, const DMInteraction& dm, const AnsatzSpec& meas) {
  const auto p = measurement_probabilities(prepared, dm, meas);
  const auto dp = dprobs_wrt_delta(prepared, dm, meas);
  return cfi(p, dp);
}

FisherReport FisherReport::make(double qfi, std::optional<double> cfi_value, FisherContext context) {
  FisherReport r;
  r.qfi = clamp_info(qfi);
  r.qb = bound_of(r.qfi);
  if (cfi_value) {
    const double f = clamp_info(*cfi_value);
    if (f > r.qfi + kInfoOrderTol) {
      throw NumericError("classical Fisher information exceeds quantum Fisher information");
    }
    r.cfi = f;
    r.cb = bound_of(f);
  }
  r.context = std::move(context);
  return r;
}

}  // namespace qsn
