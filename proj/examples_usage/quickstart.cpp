// Runs a short trajectory, prints the mass and a time average, then a small
// temporal strong-error ladder.

#include <cstdio>

#include "sche/sche.hpp"

int main() {
  using namespace sche;

  auto basis = std::make_shared<const SpectralBasis>(32);
  const SchemeParams params = make_params(ProblemSetup{}, basis, 1e-2);
  const NoiseSource noise(kDefaultSeed, 0, params.tau, 31);

  const TestFunctionSpec spec = make_test_function(*basis, {WeightProfile::exp_pos, 1.0, 2.0});
  RunningAverage avg;
  const SchemeState end = run_trajectory(params, noise, 1000, {time_average_single(basis, spec, params.tau, avg)});
  std::printf("t = %g  mass = %.15f  time average of phi = %.4f\n", end.step_index * params.tau,
              mass(*basis, from_spectral(*basis, end.coeffs)), avg.average());

  TemporalStudyConfig study;
  study.n_modes = study.n_ref = 16;
  study.tau_exponents = {3, 4, 5, 6};
  study.tau_ref_exponent = 9;
  study.trajectories = 20;
  const ConvergenceTable table = run_temporal_study(study);
  for (const auto& row : table.rows) std::printf("tau = %-10g error = %.4e\n", row.tau, row.error);
  std::printf("slope = %.3f\n", rate_regression(table));
}
