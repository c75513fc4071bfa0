#pragma once

// Command execution: turns a RunConfig into artifact files.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "config.hpp"
#include "output.hpp"
#include "svg.hpp"
#include "verify.hpp"

namespace sche {

struct AppOptions {
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
  bool svg = false;
  std::ostream* out = &std::cout;  // results
  std::ostream* log = &std::cerr;  // warnings
};

struct RunOutcome {
  int exit_code = 0;
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
};

namespace app_detail {

inline ProblemSetup setup_of(const RunConfig& c) {
  ProblemSetup s;
  s.drift = c.drift;
  s.sigma = c.sigma;
  s.u0 = c.u0;
  s.validation = c.validation;
  return s;
}

inline void warn(RunOutcome& r, const AppOptions& o, const std::string& w) {
  r.warnings.push_back(w);
  *o.log << "warning: " << w << '\n';
}

inline void scheme_warnings(const RunConfig& c, const SpectralBasis& basis, RunOutcome& r, const AppOptions& o) {
  if (auto w = dissipativity_warning(c.drift, basis, c.lf_check_radius)) warn(r, o, *w);
}

inline RunOutcome simulate(const RunConfig& c, const AppOptions& o) {
  RunOutcome r;
  auto basis = std::make_shared<const SpectralBasis>(c.n_modes);
  scheme_warnings(c, *basis, r, o);
  if (auto w = convergence_constraint_warning(c.tau, c.n_modes)) warn(r, o, *w);
  const SchemeParams params = make_params(setup_of(c), basis, c.tau);
  const NoiseSource src(c.seed, c.trajectory_id, c.tau, c.n_modes - 1);
  const RunIdentity id = identity_of(c);
  const std::int64_t total = steps_for_time(c.t_final, c.tau);

  SchemeState state = c.resume.empty() ? initial_state(params) : read_checkpoint(c.resume, id);
  if (state.step_index > total)
    throw std::invalid_argument("checkpoint step " + std::to_string(state.step_index) + " lies beyond t_final");

  CsvWriter csv(o.out_dir / "trajectory.csv", c, "trajectory", {"t", "x", "value"});
  Field nodal;
  Observer snap = [&](std::int64_t m, const SchemeState& s) {
    const bool due = m == total || (c.snapshot_interval > 0 && m % c.snapshot_interval == 0);
    if (!due) return;
    from_spectral(*basis, s.coeffs, nodal);
    const std::string t = csv_number(static_cast<double>(m) * c.tau);
    for (std::size_t i = 0; i < nodal.size(); ++i)
      csv.write_row({t, csv_number(basis->grid()[i]), csv_number(nodal[i])});
  };
  state = run_trajectory(params, src, state, total - state.step_index, {snap});
  csv.close();
  r.files.push_back(csv.path());

  const auto ckpt = o.out_dir / "checkpoint.txt";
  write_checkpoint(ckpt, id, state);
  r.files.push_back(ckpt);

  if (o.svg) {
    from_spectral(*basis, state.coeffs, nodal);
    Series s{"t = " + csv_number(static_cast<double>(state.step_index) * c.tau), {}};
    for (std::size_t i = 0; i < nodal.size(); ++i) s.points.emplace_back(basis->grid()[i], nodal[i]);
    const auto path = o.out_dir / "trajectory.svg";
    write_line_chart(path, {s}, {"final profile", "x", "u", false, false});
    r.files.push_back(path);
  }
  *o.out << "simulate: " << total << " steps, final step " << state.step_index << '\n';
  return r;
}

inline RunOutcome converge(const RunConfig& c, const AppOptions& o) {
  RunOutcome r;
  ConvergenceTable table;
  if (c.command == Command::converge_time) {
    TemporalStudyConfig t;
    t.setup = setup_of(c);
    t.n_modes = c.n_modes;
    t.n_ref = c.n_ref;
    t.t_final = c.t_final;
    t.tau_exponents = c.tau_exponents;
    t.tau_ref_exponent = c.tau_ref_exponent;
    t.trajectories = c.trajectories;
    t.seed = c.seed;
    t.thinning = c.thinning;
    t.threads = o.threads;
    scheme_warnings(c, SpectralBasis(c.n_modes), r, o);
    table = run_temporal_study(t);
  } else {
    SpatialStudyConfig s;
    s.setup = setup_of(c);
    s.n_ladder = c.n_ladder;
    s.n_ref = c.n_ref;
    s.t_final = c.t_final;
    s.tau_exponent = c.tau_ref_exponent;
    s.trajectories = c.trajectories;
    s.seed = c.seed;
    s.thinning = c.thinning;
    s.threads = o.threads;
    scheme_warnings(c, SpectralBasis(c.n_ladder.front()), r, o);
    table = run_spatial_study(s);
  }
  for (const auto& w : table.warnings) warn(r, o, w);

  CsvWriter csv(o.out_dir / "convergence.csv", c, "convergence", {"param_kind", "tau", "N", "error", "pair_rate"});
  for (const auto& row : table.rows)
    csv.write_row({row.param_kind, csv_number(row.tau), std::to_string(row.n_modes), csv_number(row.error),
                   row.pair_rate ? csv_number(*row.pair_rate) : ""});
  std::string slope = "n/a";
  if (table.rows.size() >= 3) slope = csv_number(rate_regression(table));
  csv.comment("slope = " + slope);
  csv.close();
  r.files.push_back(csv.path());

  if (o.svg) {
    Series s{"E", {}};
    for (const auto& row : table.rows) s.points.emplace_back(row.parameter(), row.error);
    const bool time = c.command == Command::converge_time;
    const auto path = o.out_dir / "convergence.svg";
    write_line_chart(path, {s}, {"strong error, slope " + slope, time ? "tau" : "h", "E", true, true});
    r.files.push_back(path);
  }
  *o.out << to_string(c.command) << ": slope = " << slope << '\n';
  for (const auto& row : table.rows)
    *o.out << "  " << row.param_kind << " tau=" << csv_number(row.tau) << " N=" << row.n_modes
           << " error=" << csv_number(row.error) << '\n';
  return r;
}

inline RunOutcome ergodic(const RunConfig& c, const AppOptions& o) {
  RunOutcome r;
  scheme_warnings(c, SpectralBasis(c.n_modes), r, o);
  ErgodicStudyConfig e;
  e.setup = setup_of(c);
  e.n_modes = c.n_modes;
  e.tau = c.tau;
  e.initial_data = c.initial_data;
  e.test_functions = c.test_functions;
  e.estimators = c.estimators;
  e.t_final = c.t_final;
  e.t_final_ensemble = c.t_final_ensemble;
  e.ensemble_size = c.ensemble_size;
  e.seed = c.seed;
  e.burn_in = c.burn_in;
  e.history_stride = c.history_stride;
  e.threads = o.threads;
  const ErgodicReport report = run_ergodic_study(e);

  auto name = [&](const ErgodicEstimate& x) {
    return "u0#" + std::to_string(x.initial_index) + "/" + c.test_functions[x.test_function_index].label() + "/" +
           to_string(x.estimator);
  };
  auto file_stem = [&](const ErgodicEstimate& x) {
    return "history_u" + std::to_string(x.initial_index) + "_f" + std::to_string(x.test_function_index) + "_" +
           to_string(x.estimator);
  };
  for (const auto& x : report.entries) {
    CsvWriter hist(o.out_dir / (file_stem(x) + ".csv"), c, "history " + name(x), {"t", "running_average"});
    for (const auto& [t, v] : x.history) hist.write_row({csv_number(t), csv_number(v)});
    hist.close();
    r.files.push_back(hist.path());
  }

  CsvWriter sum(o.out_dir / "summary.csv", c, "summary", {"name", "estimate", "abs_error_vs_zero", "wallclock_s"});
  for (const auto& x : report.entries)
    sum.write_row({name(x), csv_number(x.estimate), csv_number(std::abs(x.estimate)),
                   c.deterministic ? "0" : csv_number(x.wallclock_s)});
  sum.close();
  r.files.push_back(sum.path());

  if (o.svg) {
    std::vector<Series> series;
    for (const auto& x : report.entries) series.push_back({name(x), x.history});
    const auto path = o.out_dir / "history.svg";
    write_line_chart(path, series, {"running time averages", "t", "average", false, false});
    r.files.push_back(path);
  }
  for (const auto& x : report.entries) *o.out << "ergodic: " << name(x) << " = " << csv_number(x.estimate) << '\n';
  return r;
}

inline RunOutcome verify(const RunConfig& c, const AppOptions& o) {
  RunOutcome r;
  const auto results = run_invariant_suite();
  CsvWriter csv(o.out_dir / "verify.csv", c, "verify", {"invariant", "passed", "detail"});
  for (const auto& x : results) {
    *o.out << (x.passed ? "PASS " : "FAIL ") << x.name << ": " << x.detail << '\n';
    csv.write_row({x.name, x.passed ? "true" : "false", x.detail});
    if (!x.passed) r.exit_code = 1;
  }
  csv.close();
  r.files.push_back(csv.path());
  return r;
}

}  // namespace app_detail

/// Runs the configured command. Exceptions propagate with context; the
/// exit code is nonzero when a verify check fails.
inline RunOutcome run(const RunConfig& cfg, const AppOptions& opts = {}) {
  if (const auto errs = validation_errors(cfg); !errs.empty()) throw ConfigError(errs);
  std::filesystem::create_directories(opts.out_dir);
  switch (cfg.command) {
    case Command::simulate: return app_detail::simulate(cfg, opts);
    case Command::converge_time:
    case Command::converge_space: return app_detail::converge(cfg, opts);
    case Command::ergodic: return app_detail::ergodic(cfg, opts);
    case Command::verify: return app_detail::verify(cfg, opts);
  }
  throw std::logic_error("unhandled command");
}

}  // namespace sche
