#pragma once

// Monte-Carlo experiment drivers: strong errors against a common-noise
// reference solution, convergence tables with rate regression, and
// ergodic-limit studies with single-trajectory and ensemble time averages.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid_spectral.hpp"
#include "integrator.hpp"
#include "noise.hpp"
#include "observables.hpp"
#include "parallel.hpp"

namespace sche {

/// Everything about the continuum problem that does not depend on (tau, N).
struct ProblemSetup {
  DriftSpec drift = kExampleDrift;
  double sigma = 1.0;
  CosineSeries u0{{1.0 / 3.0, 1.0 / 3.0}};
  bool validation = false;
};

inline SchemeParams make_params(const ProblemSetup& setup, std::shared_ptr<const SpectralBasis> basis,
                                double tau) {
  SchemeParams p;
  p.tau = tau;
  p.initial = setup.u0.sample(*basis);
  p.basis = std::move(basis);
  p.sigma = setup.sigma;
  p.drift = setup.drift;
  p.validation = setup.validation;
  return p;
}

struct StrongErrorOptions {
  double t_final = 1.0;
  std::int64_t trajectories = 100;
  /// Check every k-th coarse step; k > 1 weakens the sup over time.
  std::int64_t thinning = 1;
  unsigned threads = 1;
};

namespace detail {

struct LevelRun {
  SchemeParams params;
  std::int64_t ratio = 1;   // coarse tau / reference tau
  std::int64_t n_steps = 0;
  std::int64_t n_checks = 0;
  std::vector<double> points;  // coarse midpoints plus both ends of [0, pi]
};

inline double sup_sq_discrepancy(const LevelRun& level, const SpectralBasis& ref_basis, const Field& ref_nodal,
                                 const Field& coarse_nodal) {
  const std::size_t n = coarse_nodal.size();
  double worst = 0.0;
  for (std::size_t p = 0; p < level.points.size(); ++p) {
    const double coarse = p == 0 ? coarse_nodal[0] : (p == n + 1 ? coarse_nodal[n - 1] : coarse_nodal[p - 1]);
    const double d = coarse - interpolate(ref_basis, ref_nodal, level.points[p]);
    worst = std::max(worst, d * d);
  }
  return worst;
}

}  // namespace detail

/// E(tau, N) for every coarse level against one reference, all driven by the
/// same noise source per trajectory (trajectory ids 0..L-1 of `noise`).
/// Reference values are P_N-interpolated to the coarse evaluation points.
inline std::vector<double> strong_errors(const SchemeParams& reference, std::span<const SchemeParams> coarse,
                                         const NoiseSource& noise, const StrongErrorOptions& opts) {
  if (opts.trajectories < 1) throw std::invalid_argument("strong_errors: need at least one trajectory");
  if (opts.thinning < 1) throw std::invalid_argument("strong_errors: thinning must be >= 1");
  validate(reference);
  const SpectralBasis& ref_basis = *reference.basis;
  if (noise.ratio_for(reference.tau) != 1)
    throw std::invalid_argument("strong_errors: noise tau_fine must equal the reference tau");
  const std::int64_t ref_steps = steps_for_time(opts.t_final, reference.tau);

  std::vector<detail::LevelRun> levels;
  for (const auto& c : coarse) {
    validate(c);
    if (c.basis->n_modes() > ref_basis.n_modes())
      throw std::invalid_argument("strong_errors: coarse N = " + std::to_string(c.basis->n_modes()) +
                                  " exceeds N_ref = " + std::to_string(ref_basis.n_modes()));
    detail::LevelRun lv;
    lv.params = c;
    const double r = c.tau / reference.tau;
    lv.ratio = std::llround(r);
    if (lv.ratio < 1 || std::abs(r - static_cast<double>(lv.ratio)) > 1e-9 * r)
      throw std::invalid_argument("strong_errors: tau_ref does not divide tau = " + std::to_string(c.tau));
    lv.n_steps = steps_for_time(opts.t_final, c.tau);
    lv.n_checks = lv.n_steps / opts.thinning + 1;
    lv.points.push_back(0.0);
    lv.points.insert(lv.points.end(), c.basis->grid().begin(), c.basis->grid().end());
    lv.points.push_back(std::numbers::pi);
    levels.push_back(std::move(lv));
  }

  const auto n_traj = static_cast<std::size_t>(opts.trajectories);
  // per_traj[k][l][i] = sup_x |u - u_ref|^2 at check i of level l, trajectory k
  std::vector<std::vector<std::vector<double>>> per_traj(n_traj);

  parallel_for(n_traj, opts.threads, [&](std::size_t k) {
    const NoiseSource src = noise.with_trajectory(k);
    TamedExponentialEuler ref_stepper(reference);
    SchemeState ref_state = initial_state(reference);
    std::vector<TamedExponentialEuler> steppers;
    std::vector<SchemeState> states;
    for (const auto& lv : levels) {
      steppers.emplace_back(lv.params);
      states.push_back(initial_state(lv.params));
    }
    auto& out = per_traj[k];
    out.resize(levels.size());
    for (std::size_t l = 0; l < levels.size(); ++l) out[l].assign(static_cast<std::size_t>(levels[l].n_checks), 0.0);

    Field ref_nodal, coarse_nodal;
    SpectralField dbeta;
    try {
      for (std::int64_t s = 0; s <= ref_steps; ++s) {
        bool have_ref_nodal = false;
        for (std::size_t l = 0; l < levels.size(); ++l) {
          const auto& lv = levels[l];
          if (s % lv.ratio != 0) continue;
          const std::int64_t i = s / lv.ratio;
          if (i % opts.thinning == 0) {
            if (!have_ref_nodal) {
              from_spectral(ref_basis, ref_state.coeffs, ref_nodal);
              have_ref_nodal = true;
            }
            from_spectral(*lv.params.basis, states[l].coeffs, coarse_nodal);
            out[l][static_cast<std::size_t>(i / opts.thinning)] =
                detail::sup_sq_discrepancy(lv, ref_basis, ref_nodal, coarse_nodal);
          }
          if (i < lv.n_steps) {
            increment_field(src, *lv.params.basis, i, lv.ratio, dbeta);
            steppers[l].advance(states[l], dbeta);
          }
        }
        if (s < ref_steps) {
          increment_field(src, ref_basis, s, 1, dbeta);
          ref_stepper.advance(ref_state, dbeta);
        }
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("trajectory " + std::to_string(k) + ": " + e.what());
    }
  });

  // Reduce in trajectory order; the running mean is exact for identical inputs.
  std::vector<double> errors(levels.size(), 0.0);
  for (std::size_t l = 0; l < levels.size(); ++l) {
    double worst = 0.0;
    for (std::int64_t i = 0; i < levels[l].n_checks; ++i) {
      double mean = 0.0;
      for (std::size_t k = 0; k < n_traj; ++k)
        mean += (per_traj[k][l][static_cast<std::size_t>(i)] - mean) / static_cast<double>(k + 1);
      worst = std::max(worst, mean);
    }
    errors[l] = std::sqrt(worst);
  }
  return errors;
}

/// E(tau, N) for a single coarse configuration.
inline double mean_square_error(const SchemeParams& coarse, const SchemeParams& reference, const NoiseSource& noise,
                                const StrongErrorOptions& opts) {
  const SchemeParams levels[] = {coarse};
  return strong_errors(reference, levels, noise, opts).front();
}

struct ConvergenceRow {
  std::string param_kind;  // "tau" or "N"
  double tau = 0.0;
  int n_modes = 0;
  double error = 0.0;
  std::optional<double> pair_rate;

  /// The varied discretization parameter: tau, or h = pi/N.
  double parameter() const { return param_kind == "N" ? std::numbers::pi / n_modes : tau; }
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double t_final = 0.0;
  std::int64_t trajectories = 0;
  double tau_ref = 0.0;
  int n_ref = 0;
  std::uint64_t seed = 0;
  std::int64_t thinning = 1;
  std::vector<std::string> warnings;
};

/// Fills pair_rate = log(e_{k-1}/e_k) / log(p_{k-1}/p_k); log2 ratio for halvings.
inline void fill_pair_rates(ConvergenceTable& table) {
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    auto& row = table.rows[k];
    if (k == 0) {
      row.pair_rate.reset();
      continue;
    }
    const auto& prev = table.rows[k - 1];
    row.pair_rate = std::log2(prev.error / row.error) / std::log2(prev.parameter() / row.parameter());
  }
}

/// Least-squares slope of log2(error) against log2(parameter).
inline double rate_regression(std::span<const double> parameters, std::span<const double> errors) {
  if (parameters.size() != errors.size()) throw std::invalid_argument("rate_regression: length mismatch");
  if (parameters.size() < 3) throw std::invalid_argument("rate_regression: need at least 3 rows");
  const auto n = static_cast<double>(parameters.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < parameters.size(); ++k) {
    if (!(parameters[k] > 0.0) || !(errors[k] > 0.0))
      throw std::invalid_argument("rate_regression: parameters and errors must be positive");
    sx += std::log2(parameters[k]);
    sy += std::log2(errors[k]);
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < parameters.size(); ++k) {
    const double dx = std::log2(parameters[k]) - mx;
    sxy += dx * (std::log2(errors[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

inline double rate_regression(const ConvergenceTable& table) {
  std::vector<double> p, e;
  for (const auto& r : table.rows) {
    p.push_back(r.parameter());
    e.push_back(r.error);
  }
  return rate_regression(p, e);
}

struct TemporalStudyConfig {
  ProblemSetup setup;
  int n_modes = 64;
  int n_ref = 64;
  double t_final = 1.0;
  std::vector<int> tau_exponents{4, 5, 6, 7, 8};  // tau = T 2^-k
  int tau_ref_exponent = 12;
  std::int64_t trajectories = 100;
  std::uint64_t seed = 1;
  std::int64_t thinning = 1;
  unsigned threads = 1;
};

struct SpatialStudyConfig {
  ProblemSetup setup;
  std::vector<int> n_ladder{8, 16, 32, 64};
  int n_ref = 256;
  double t_final = 1.0;
  int tau_exponent = 12;  // tau = tau_ref = T 2^-k
  std::int64_t trajectories = 100;
  std::uint64_t seed = 1;
  std::int64_t thinning = 1;
  unsigned threads = 1;
};

namespace detail {
inline NoiseSource study_noise(std::uint64_t seed, double tau_ref, int n_ref) {
  return NoiseSource(seed, 0, tau_ref, n_ref - 1);
}
}  // namespace detail

/// Fixes N and halves tau down a ladder against a (tau_ref, N_ref) reference.
inline ConvergenceTable run_temporal_study(const TemporalStudyConfig& cfg) {
  if (cfg.tau_exponents.empty()) throw std::invalid_argument("temporal study: empty tau ladder");
  ConvergenceTable table;
  table.t_final = cfg.t_final;
  table.trajectories = cfg.trajectories;
  table.tau_ref = std::ldexp(cfg.t_final, -cfg.tau_ref_exponent);
  table.n_ref = cfg.n_ref;
  table.seed = cfg.seed;
  table.thinning = cfg.thinning;

  auto ref_basis = std::make_shared<const SpectralBasis>(cfg.n_ref);
  auto basis = cfg.n_modes == cfg.n_ref ? ref_basis : std::make_shared<const SpectralBasis>(cfg.n_modes);
  const SchemeParams reference = make_params(cfg.setup, ref_basis, table.tau_ref);
  std::vector<SchemeParams> coarse;
  for (int k : cfg.tau_exponents) {
    if (k > cfg.tau_ref_exponent) throw std::invalid_argument("temporal study: tau finer than tau_ref");
    const double tau = std::ldexp(cfg.t_final, -k);
    coarse.push_back(make_params(cfg.setup, basis, tau));
    if (auto w = convergence_constraint_warning(tau, cfg.n_modes)) table.warnings.push_back(*w);
  }
  const StrongErrorOptions opts{cfg.t_final, cfg.trajectories, cfg.thinning, cfg.threads};
  const auto errors = strong_errors(reference, coarse, detail::study_noise(cfg.seed, table.tau_ref, cfg.n_ref), opts);
  for (std::size_t k = 0; k < coarse.size(); ++k)
    table.rows.push_back({"tau", coarse[k].tau, cfg.n_modes, errors[k], std::nullopt});
  fill_pair_rates(table);
  return table;
}

/// Fixes tau = tau_ref and doubles N up a ladder against N_ref.
inline ConvergenceTable run_spatial_study(const SpatialStudyConfig& cfg) {
  if (cfg.n_ladder.empty()) throw std::invalid_argument("spatial study: empty N ladder");
  ConvergenceTable table;
  table.t_final = cfg.t_final;
  table.trajectories = cfg.trajectories;
  table.tau_ref = std::ldexp(cfg.t_final, -cfg.tau_exponent);
  table.n_ref = cfg.n_ref;
  table.seed = cfg.seed;
  table.thinning = cfg.thinning;

  auto ref_basis = std::make_shared<const SpectralBasis>(cfg.n_ref);
  const SchemeParams reference = make_params(cfg.setup, ref_basis, table.tau_ref);
  std::vector<SchemeParams> coarse;
  for (int n : cfg.n_ladder) {
    auto basis = n == cfg.n_ref ? ref_basis : std::make_shared<const SpectralBasis>(n);
    coarse.push_back(make_params(cfg.setup, basis, table.tau_ref));
    if (auto w = convergence_constraint_warning(table.tau_ref, n)) table.warnings.push_back(*w);
  }
  const StrongErrorOptions opts{cfg.t_final, cfg.trajectories, cfg.thinning, cfg.threads};
  const auto errors = strong_errors(reference, coarse, detail::study_noise(cfg.seed, table.tau_ref, cfg.n_ref), opts);
  for (std::size_t k = 0; k < coarse.size(); ++k)
    table.rows.push_back({"N", table.tau_ref, cfg.n_ladder[k], errors[k], std::nullopt});
  fill_pair_rates(table);
  return table;
}

enum class Estimator { single, ensemble };  // Approximation II, Approximation I

inline std::string to_string(Estimator e) { return e == Estimator::single ? "II" : "I"; }

struct ErgodicStudyConfig {
  ProblemSetup setup;  // setup.u0 is ignored; initial data come from `initial_data`
  int n_modes = 64;
  double tau = 5e-3;
  std::vector<CosineSeries> initial_data{{{1.0 / 3.0}}, {{1.0 / 3.0, 1.0 / 3.0}}};
  std::vector<TestFunctionDesc> test_functions{{WeightProfile::exp_pos, 1.0, 2.0}};
  std::vector<Estimator> estimators{Estimator::single};
  double t_final = 500.0;            // Approximation II horizon
  double t_final_ensemble = 50.0;    // Approximation I horizon
  std::int64_t ensemble_size = 50;   // L for Approximation I
  std::uint64_t seed = 1;
  std::int64_t burn_in = 0;
  std::int64_t history_stride = 100;
  unsigned threads = 1;
};

struct ErgodicEstimate {
  std::size_t initial_index = 0;
  std::size_t test_function_index = 0;
  Estimator estimator = Estimator::single;
  double estimate = 0.0;
  std::vector<std::pair<double, double>> history;
  double wallclock_s = 0.0;
};

struct ErgodicReport {
  std::vector<ErgodicEstimate> entries;

  const ErgodicEstimate& find(std::size_t u0, std::size_t spec, Estimator e) const {
    for (const auto& x : entries)
      if (x.initial_index == u0 && x.test_function_index == spec && x.estimator == e) return x;
    throw std::out_of_range("ErgodicReport: no such entry");
  }
};

namespace detail {

/// One trajectory feeding time averages of several test functions.
inline std::vector<RunningAverage> time_averages(const SchemeParams& params, const NoiseSource& src,
                                                 std::int64_t n_steps, std::span<const TestFunctionSpec> specs,
                                                 const TimeAverageOptions& opts) {
  std::vector<RunningAverage> avgs(specs.size());
  Field nodal;
  const SpectralBasis& basis = *params.basis;
  Observer obs = [&](std::int64_t m, const SchemeState& s) {
    if (m < opts.burn_in) return;
    from_spectral(basis, s.coeffs, nodal);
    for (std::size_t q = 0; q < specs.size(); ++q) {
      avgs[q].add(phi_test(basis, specs[q], nodal));
      if (opts.history_stride > 0 && m % opts.history_stride == 0)
        avgs[q].record(static_cast<double>(m) * params.tau);
    }
  };
  run_trajectory(params, src, n_steps, {obs});
  return avgs;
}

}  // namespace detail

/// Time-average estimates of ergodic limits for every (u0, test function)
/// pair. Approximation II uses trajectory 0; Approximation I averages
/// trajectories 0..L-1.
inline ErgodicReport run_ergodic_study(const ErgodicStudyConfig& cfg) {
  if (cfg.initial_data.empty() || cfg.test_functions.empty())
    throw std::invalid_argument("ergodic study: need initial data and test functions");
  auto basis = std::make_shared<const SpectralBasis>(cfg.n_modes);
  std::vector<TestFunctionSpec> specs;
  for (const auto& d : cfg.test_functions) specs.push_back(make_test_function(*basis, d));
  const NoiseSource noise(cfg.seed, 0, cfg.tau, cfg.n_modes - 1);
  const TimeAverageOptions opts{cfg.burn_in, cfg.history_stride};

  ErgodicReport report;
  for (std::size_t u = 0; u < cfg.initial_data.size(); ++u) {
    ProblemSetup setup = cfg.setup;
    setup.u0 = cfg.initial_data[u];
    const SchemeParams params = make_params(setup, basis, cfg.tau);
    for (Estimator est : cfg.estimators) {
      const auto start = std::chrono::steady_clock::now();
      std::vector<RunningAverage> combined;
      if (est == Estimator::single) {
        combined = detail::time_averages(params, noise, steps_for_time(cfg.t_final, cfg.tau), specs, opts);
      } else {
        if (cfg.ensemble_size < 1) throw std::invalid_argument("ergodic study: ensemble_size must be >= 1");
        const auto n = static_cast<std::size_t>(cfg.ensemble_size);
        const std::int64_t steps = steps_for_time(cfg.t_final_ensemble, cfg.tau);
        std::vector<std::vector<RunningAverage>> runs(n);
        parallel_for(n, cfg.threads, [&](std::size_t k) {
          runs[k] = detail::time_averages(params, noise.with_trajectory(k), steps, specs, opts);
        });
        for (std::size_t q = 0; q < specs.size(); ++q) {
          std::vector<RunningAverage> per_spec;
          per_spec.reserve(n);
          for (auto& r : runs) per_spec.push_back(std::move(r[q]));
          combined.push_back(time_average_ensemble(per_spec));
        }
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      for (std::size_t q = 0; q < specs.size(); ++q)
        report.entries.push_back({u, q, est, combined[q].average(), std::move(combined[q].history()), secs});
    }
  }
  return report;
}

}  // namespace sche
