#pragma once

// Quick structural invariant suite behind the `verify` command. Every check
// is deterministic and runs in well under a second.

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "config.hpp"
#include "experiments.hpp"

namespace sche {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace verify_detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline CheckResult eigen_structure() {
  double worst_residual = 0.0, worst_gram = 0.0;
  for (int n : {8, 64}) {
    const SpectralBasis b(n);
    for (int j = 0; j < n; ++j) {
      const Field phi = b.mode(j);
      const Field lap = apply_laplacian(b, phi);
      double r = 0.0;
      for (int i = 0; i < n; ++i) r += std::pow(lap[i] + b.eigenvalue(j) * phi[i], 2);
      worst_residual = std::max(worst_residual, std::sqrt(b.weight() * r));
      for (int k = 0; k < n; ++k) {
        double g = 0.0;
        for (int i = 0; i < n; ++i) g += b.at(i, j) * b.at(i, k);
        worst_gram = std::max(worst_gram, std::abs(b.weight() * g - (j == k ? 1.0 : 0.0)));
      }
    }
  }
  return {"eigen_structure", worst_residual <= 1e-10 && worst_gram <= 1e-12,
          "residual " + sci(worst_residual) + ", gram " + sci(worst_gram)};
}

inline CheckResult mass_conservation() {
  auto basis = std::make_shared<const SpectralBasis>(64);
  const SchemeParams p = make_params(ProblemSetup{}, basis, 1e-2);
  const NoiseSource src(kDefaultSeed, 0, p.tau, 63);
  SchemeState s = initial_state(p);
  double worst = 0.0;
  Observer obs = [&](std::int64_t, const SchemeState& st) {
    const double m = mass(*basis, from_spectral(*basis, st.coeffs));
    worst = std::max(worst, std::abs(m - st.mass0) / std::abs(st.mass0));
  };
  run_trajectory(p, src, s, 1000, {obs});
  return {"mass_conservation", worst <= 1e-12, "max relative drift " + sci(worst)};
}

inline CheckResult linear_oracle() {
  auto basis = std::make_shared<const SpectralBasis>(32);
  SchemeParams p;
  p.basis = basis;
  p.tau = 1e-2;
  p.sigma = 0.0;
  p.validation = true;
  p.drift = {0.0, 0.0, 0.3, 0.0};
  p.initial = sample(*basis, [](double x) { return 0.2 + std::cos(x) + 0.5 * std::cos(3 * x); });
  const NoiseSource src(1, 0, p.tau, 31);
  const SchemeState s0 = initial_state(p);
  const SchemeState s = run_trajectory(p, src, s0, 200);
  // scalar recursion per mode with the taming denominator 1 + tau ||u||^12
  std::vector<double> c = s0.coeffs.coeffs;
  for (int m = 0; m < 200; ++m) {
    double w = 0.0;
    for (int j = 0; j < 32; ++j) w += (1.0 + basis->eigenvalue(j)) * c[j] * c[j];
    const double d = 1.0 + p.tau * std::pow(w, 6);
    for (int j = 1; j < 32; ++j) {
      const double lam = basis->eigenvalue(j);
      c[j] = std::exp(-lam * lam * p.tau) * (c[j] - p.tau * lam * 0.3 * c[j] / d);
    }
  }
  double worst = 0.0;
  for (int j = 0; j < 32; ++j) worst = std::max(worst, std::abs(s.coeffs[j] - c[j]));
  return {"linear_oracle", worst <= 1e-12, "max coefficient deviation " + sci(worst)};
}

inline CheckResult noise_refinement() {
  const NoiseSource src(kDefaultSeed, 3, 1.0 / 1024, 63);
  bool ok = true;
  for (std::int64_t r : {2, 4, 8})
    for (int j = 1; j <= 63 && ok; j += 7)
      for (std::int64_t m = 0; m < 16 && ok; ++m) {
        const std::int64_t r1 = r / 2;
        const double whole = src.coarse_increment(j, m, r);
        const double halves = src.coarse_increment(j, 2 * m, r1) + src.coarse_increment(j, 2 * m + 1, r1);
        double fine = 0.0;
        for (std::int64_t k = 0; k < r; ++k) fine += src.fine_increment(j, m * r + k);
        ok = whole == halves && whole == fine;
      }
  return {"noise_refinement", ok, ok ? "coarse == sum of fine, bitwise" : "mismatch"};
}

inline CheckResult mode_truncation() {
  const NoiseSource src(kDefaultSeed, 0, 1e-2, 63);
  const SpectralBasis b8(8), b64(64);
  bool ok = true;
  for (std::int64_t m = 0; m < 50 && ok; ++m) {
    const SpectralField a = increment_field(src, b8, m, 1);
    const SpectralField c = increment_field(src, b64, m, 1);
    for (int j = 0; j < 8; ++j) ok = ok && a[j] == c[j];
  }
  return {"mode_truncation", ok, ok ? "N=8 modes match N=64 modes 0..7" : "mismatch"};
}

inline CheckResult checkpoint_resume() {
  auto basis = std::make_shared<const SpectralBasis>(16);
  const SchemeParams p = make_params(ProblemSetup{}, basis, 1e-2);
  const NoiseSource src(kDefaultSeed, 0, p.tau, 15);
  const SchemeState full = run_trajectory(p, src, 100);
  const SchemeState half = run_trajectory(p, src, 50);
  const RunIdentity id{16, p.tau, p.sigma, p.drift, kDefaultSeed, 0};
  std::stringstream io;
  write_checkpoint(io, id, half);
  const SchemeState back = read_checkpoint(io, id);
  const SchemeState resumed = run_trajectory(p, src, back, 50);
  const bool ok = back == half && resumed == full;
  return {"checkpoint_resume", ok, ok ? "resumed state bit-identical" : "state differs"};
}

inline CheckResult config_round_trip() {
  for (Command c : {Command::simulate, Command::converge_time, Command::converge_space, Command::ergodic,
                    Command::verify}) {
    const RunConfig cfg = defaults_for(c);
    if (parse_config(serialize_config(cfg)) != cfg) return {"config_round_trip", false, to_string(c)};
  }
  return {"config_round_trip", true, "all command defaults"};
}

inline CheckResult taming_bound() {
  auto basis = std::make_shared<const SpectralBasis>(32);
  const SchemeParams p = make_params(ProblemSetup{}, basis, 5e-3);
  const NoiseSource src(kDefaultSeed, 0, p.tau, 31);
  bool ok = true;
  Observer obs = [&](std::int64_t, const SchemeState& s) {
    const double d = taming_denominator(p, from_spectral(*basis, s.coeffs));
    ok = ok && d >= 1.0 && std::isfinite(d);
  };
  run_trajectory(p, src, 500, {obs});
  return {"taming_denominator", ok, ok ? ">= 1 and finite along a trajectory" : "violated"};
}

}  // namespace verify_detail

inline std::vector<CheckResult> run_invariant_suite() {
  using namespace verify_detail;
  const std::vector<std::function<CheckResult()>> checks = {
      eigen_structure, mass_conservation, linear_oracle, noise_refinement,
      mode_truncation, checkpoint_resume, config_round_trip, taming_bound};
  std::vector<CheckResult> out;
  for (const auto& check : checks) {
    try {
      out.push_back(check());
    } catch (const std::exception& e) {
      out.push_back({"exception", false, e.what()});
    }
  }
  return out;
}

}  // namespace sche
