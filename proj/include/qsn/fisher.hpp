#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qsn/ansatz.hpp"
#include "qsn/dm.hpp"
#include "qsn/sim.hpp"

namespace qsn {

/// Outcomes with smaller probability are dropped from the CFI sum.
inline constexpr double kProbFloor = 1e-12;
/// Eigenvalue-pair cutoff for the mixed-state QFI.
inline constexpr double kEigTol = 1e-12;
/// Slack for the ordering CFI <= QFI.
inline constexpr double kInfoOrderTol = 1e-9;

/// Q = 4 (<dpsi|dpsi> - |<psi|dpsi>|^2), clamped at zero within -1e-10.
double qfi_pure(const StateVector& psi, const Amplitudes& dpsi);

/// QFI from the SLD in the eigenbasis of rho:
///   Q = sum_{l_i + l_j > eig_tol} 2 |<i|drho|j>|^2 / (l_i + l_j).
double qfi_mixed(const DensityMatrix& rho, const Eigen::MatrixXcd& drho, double eig_tol = kEigTol);

/// F = sum_m (dp_m)^2 / p_m over outcomes with p_m >= p_floor.
double cfi(std::span<const double> probs, std::span<const double> dprobs, double p_floor = kProbFloor);

/// Cramer-Rao bound 1 / (nu * info).
double crb(int nu, double info);

/// QFI of V(delta, alpha)|probe>.
double probe_qfi(const StateVector& probe, const DMInteraction& dm);

/// Outcome probabilities of M V |prepared>.
std::vector<double> measurement_probabilities(const StateVector& prepared, const DMInteraction& dm,
                                              const AnsatzSpec& meas);

/// Exact d p(m) / d delta for the readout M V |prepared>.
std::vector<double> dprobs_wrt_delta(const StateVector& prepared, const DMInteraction& dm,
                                     const AnsatzSpec& meas);

/// CFI of the readout M V |prepared>.
double measurement_cfi(const StateVector& prepared, const DMInteraction& dm, const AnsatzSpec& meas);

struct FisherContext {
  std::string topology;
  int l1 = 0;
  int l2 = 0;
  double delta = 0.0;
  double alpha = 0.0;
  double lambda = 0.0;
};

struct FisherReport {
  double qfi = 0.0;
  std::optional<double> cfi;
  double qb = std::numeric_limits<double>::infinity();
  std::optional<double> cb;
  FisherContext context;

  /// Fills the bounds; qfi = 0 maps to qb = +inf. Throws NumericError when
  /// cfi exceeds qfi beyond kInfoOrderTol.
  static FisherReport make(double qfi, std::optional<double> cfi, FisherContext context);
};

}  // namespace qsn
