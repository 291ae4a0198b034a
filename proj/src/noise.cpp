#include "qsn/noise.hpp"

#include <cmath>
#include <sstream>

#include "qsn/errors.hpp"
#include "qsn/fisher.hpp"
#include "qsn/io.hpp"

namespace qsn {

KrausSet dephasing_kraus(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("dephasing strength must lie in [0, 1]");
  Mat2 k0 = Mat2::Zero();
  Mat2 k1 = Mat2::Zero();
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - lambda);
  k1(1, 1) = std::sqrt(lambda);
  return KrausSet({k0, k1});
}

NoisyState noisy_sensed_state(const AnsatzSpec& preparation, const DMInteraction& dm, double lambda) {
  const KrausSet kraus = dephasing_kraus(lambda);
  const int n = preparation.n_qubits();
  const StateVector prepared = apply_ansatz(init_ground(n), preparation);
  const Amplitudes psi = apply_v(prepared, dm).amplitudes();
  const Amplitudes d = v_delta_derivative(prepared, dm);
  Eigen::MatrixXcd rho = psi * psi.adjoint();
  Eigen::MatrixXcd drho = d * psi.adjoint() + psi * d.adjoint();
  if (lambda > 0.0) {
    for (int q = 0; q < n; ++q) {
      apply_channel_inplace(rho, n, q, kraus);
      apply_channel_inplace(drho, n, q, kraus);
    }
  }
  return {DensityMatrix::trusted(n, std::move(rho)), std::move(drho)};
}

double qfi_under_noise(const AnsatzSpec& preparation, const DMInteraction& dm, double lambda) {
  const auto s = noisy_sensed_state(preparation, dm, lambda);
  return qfi_mixed(s.rho, s.drho);
}

double qb_under_noise(const AnsatzSpec& preparation, const DMInteraction& dm, double lambda) {
  const double q = qfi_under_noise(preparation, dm, lambda);
  if (!(q > 0.0)) throw DegenerateProbeError("zero QFI under noise");
  return 1.0 / q;
}

DephasingSweep dephasing_sweep(const AnsatzSpec& preparation, const DMInteraction& dm,
                               std::vector<double> lambdas) {
  if (lambdas.empty() || lambdas.front() != 0.0) throw ConfigError("noise sweep must start at lambda = 0");
  DephasingSweep sweep;
  for (double l : lambdas) {
    const double q = qfi_under_noise(preparation, dm, l);
    if (!(q > 0.0)) throw DegenerateProbeError("zero QFI under noise");
    sweep.qfi_values.push_back(q);
    sweep.qb_values.push_back(1.0 / q);
  }
  sweep.lambdas = std::move(lambdas);
  sweep.delta_vs_noiseless = sweep.qb_values.back() - sweep.qb_values.front();
  return sweep;
}

void write_sweep_csv(const std::filesystem::path& path, const DephasingSweep& sweep) {
  std::ostringstream out;
  out << "# units: lambda dimensionless; qfi dimensionless; qb and delta_vs_noiseless in rad^2 per measurement\n";
  out << "lambda,qfi,qb,delta_vs_noiseless\n";
  for (std::size_t i = 0; i < sweep.lambdas.size(); ++i) {
    out << format_double(sweep.lambdas[i]) << "," << format_double(sweep.qfi_values[i]) << ","
        << format_double(sweep.qb_values[i]) << ","
        << format_double(sweep.qb_values[i] - sweep.qb_values.front()) << "\n";
  }
  write_file_atomic(path, out.str());
}

}  // namespace qsn
