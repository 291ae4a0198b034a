#pragma once

#include <filesystem>
#include <vector>

#include "qsn/ansatz.hpp"
#include "qsn/dm.hpp"
#include "qsn/sim.hpp"

namespace qsn {

/// K0 = diag(1, sqrt(1 - lambda)), K1 = diag(0, sqrt(lambda)).
KrausSet dephasing_kraus(double lambda);

struct NoisyState {
  DensityMatrix rho;
  Eigen::MatrixXcd drho;  // d rho / d delta
};

/// Dephasing on every qubit of V U(theta)|0><0| U^dag V^dag, applied after
/// sensing; drho is the channel image of the pure-state derivative.
NoisyState noisy_sensed_state(const AnsatzSpec& preparation, const DMInteraction& dm, double lambda);

double qfi_under_noise(const AnsatzSpec& preparation, const DMInteraction& dm, double lambda);
double qb_under_noise(const AnsatzSpec& preparation, const DMInteraction& dm, double lambda);

struct DephasingSweep {
  std::vector<double> lambdas;
  std::vector<double> qfi_values;
  std::vector<double> qb_values;
  double delta_vs_noiseless = 0.0;  // QB(lambda_max) - QB(0)
};

/// The preparation stays fixed across noise levels. `lambdas` must start at 0.
DephasingSweep dephasing_sweep(const AnsatzSpec& preparation, const DMInteraction& dm,
                               std::vector<double> lambdas);

/// CSV `lambda,qfi,qb,delta_vs_noiseless`; the last column is QB(lambda) - QB(0).
void write_sweep_csv(const std::filesystem::path& path, const DephasingSweep& sweep);

}  // namespace qsn
