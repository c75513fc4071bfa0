#pragma once

// Functionals of the discrete solution: mass, the bounded test-function
// family phi_{v,alpha1,alpha2}, the Lyapunov function V and time-average
// estimators of ergodic limits.

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "grid_spectral.hpp"
#include "integrator.hpp"

namespace sche {

/// Spatial mean (1/pi) int u dx by the midpoint rule.
inline double mass(const SpectralBasis& basis, const Field& u) {
  detail::check_size(basis, u.size(), "mass");
  double s = 0.0;
  for (double v : u.values) s += v;
  return s / static_cast<double>(u.size());
}

/// Closed-form weights v for the test functions.
enum class WeightProfile { exp_pos, exp_neg, one };

inline std::string to_string(WeightProfile p) {
  switch (p) {
    case WeightProfile::exp_pos: return "exp";
    case WeightProfile::exp_neg: return "exp_neg";
    case WeightProfile::one: return "one";
  }
  return "?";
}

inline WeightProfile weight_profile_from_string(const std::string& s) {
  if (s == "exp") return WeightProfile::exp_pos;
  if (s == "exp_neg") return WeightProfile::exp_neg;
  if (s == "one") return WeightProfile::one;
  throw std::invalid_argument("unknown weight profile '" + s + "' (expected exp, exp_neg or one)");
}

inline double eval_profile(WeightProfile p, double x) {
  switch (p) {
    case WeightProfile::exp_pos: return std::exp(x);
    case WeightProfile::exp_neg: return std::exp(-x);
    case WeightProfile::one: return 1.0;
  }
  return 0.0;
}

/// Descriptor of phi_{v,alpha1,alpha2} independent of the grid.
struct TestFunctionDesc {
  WeightProfile profile = WeightProfile::exp_pos;
  double alpha1 = 1.0;
  double alpha2 = 2.0;

  std::string label() const {
    std::ostringstream os;
    os << to_string(profile) << ':' << alpha1 << ':' << alpha2;
    return os.str();
  }
  bool operator==(const TestFunctionDesc&) const = default;
};

/// phi_{v,alpha1,alpha2} with v already evaluated on a particular grid.
struct TestFunctionSpec {
  Field v;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
};

inline TestFunctionSpec make_test_function(const SpectralBasis& basis, const TestFunctionDesc& d) {
  if (d.alpha2 == 0.0) throw std::invalid_argument("test function: alpha2 must be nonzero");
  return {sample(basis, [&](double x) { return eval_profile(d.profile, x); }), d.alpha1, d.alpha2};
}

/// g(v,u,alpha1) = int v u - alpha1 (int v) (1/pi int u), midpoint quadrature.
/// The subtracted term uses the mean of u, so with alpha1 = 1 the functional
/// only sees the mean-free part of u.
inline double g_functional(const SpectralBasis& basis, const TestFunctionSpec& spec, const Field& u) {
  detail::check_size(basis, u.size(), "g_functional");
  detail::check_size(basis, spec.v.size(), "g_functional weight");
  double vu = 0.0, vs = 0.0, us = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    vu += spec.v[i] * u[i];
    vs += spec.v[i];
    us += u[i];
  }
  const double w = basis.weight();
  return w * vu - spec.alpha1 * (w * vs) * (us / static_cast<double>(u.size()));
}

/// alpha2 g / (1 + (g/alpha2)^2); bounded by alpha2^2 / 2 in absolute value.
inline double phi_of_g(double g, double alpha2) {
  const double s = g / alpha2;
  return alpha2 * g / (1.0 + s * s);
}

inline double phi_test(const SpectralBasis& basis, const TestFunctionSpec& spec, const Field& u) {
  if (spec.alpha2 == 0.0) throw std::invalid_argument("phi_test: alpha2 must be nonzero");
  return phi_of_g(g_functional(basis, spec, u), spec.alpha2);
}

/// V = sum_{j>=1} c_j^2 / lambda_j + c_0^2 + 1.
inline double lyapunov_V(const SpectralBasis& basis, const SpectralField& c) {
  detail::check_size(basis, c.size(), "lyapunov_V");
  double v = c[0] * c[0] + 1.0;
  for (std::size_t j = 1; j < c.size(); ++j) v += c[j] * c[j] / basis.eigenvalues()[j];
  return v;
}

inline double lyapunov_V(const SpectralBasis& basis, const Field& u) {
  return lyapunov_V(basis, to_spectral(basis, u));
}

/// Equal-weight running mean with optional (t, average) history.
class RunningAverage {
 public:
  void add(double value) {
    sum_ += value;
    ++count_;
  }
  void record(double t) { history_.emplace_back(t, average()); }

  std::int64_t count() const noexcept { return count_; }
  double sum() const noexcept { return sum_; }
  double average() const {
    if (count_ == 0) throw std::logic_error("RunningAverage: no samples yet");
    return sum_ / static_cast<double>(count_);
  }
  const std::vector<std::pair<double, double>>& history() const noexcept { return history_; }
  std::vector<std::pair<double, double>>& history() noexcept { return history_; }

 private:
  std::int64_t count_ = 0;
  double sum_ = 0.0;
  std::vector<std::pair<double, double>> history_;
};

struct TimeAverageOptions {
  /// Samples with step index below this are skipped.
  std::int64_t burn_in = 0;
  /// Record history every this many steps (0 disables history).
  std::int64_t history_stride = 0;
};

/// Observer feeding phi(U_m) into `avg` (Approximation II when used on one
/// trajectory). `avg` must outlive the run.
inline Observer time_average_single(std::shared_ptr<const SpectralBasis> basis, TestFunctionSpec spec,
                                    double tau, RunningAverage& avg, TimeAverageOptions opts = {}) {
  return [basis = std::move(basis), spec = std::move(spec), tau, &avg, opts,
          nodal = Field()](std::int64_t m, const SchemeState& s) mutable {
    if (m < opts.burn_in) return;
    from_spectral(*basis, s.coeffs, nodal);
    avg.add(phi_test(*basis, spec, nodal));
    if (opts.history_stride > 0 && m % opts.history_stride == 0) avg.record(static_cast<double>(m) * tau);
  };
}

/// Approximation I: grand mean over trajectories of per-trajectory time
/// averages. Histories are averaged pointwise when all share the same times.
inline RunningAverage time_average_ensemble(std::span<const RunningAverage> runs) {
  if (runs.empty()) throw std::invalid_argument("time_average_ensemble: empty ensemble");
  RunningAverage out;
  double mean = 0.0;
  for (std::size_t k = 0; k < runs.size(); ++k) mean += (runs[k].average() - mean) / static_cast<double>(k + 1);
  bool same_times = true;
  const auto& h0 = runs.front().history();
  for (const auto& r : runs)
    if (r.history().size() != h0.size()) same_times = false;
  if (same_times) {
    for (std::size_t i = 0; i < h0.size(); ++i) {
      double hm = 0.0;
      for (std::size_t k = 0; k < runs.size(); ++k)
        hm += (runs[k].history()[i].second - hm) / static_cast<double>(k + 1);
      out.history().emplace_back(h0[i].first, hm);
    }
  }
  // One pooled sample whose value is the grand mean keeps average() exact.
  out.add(mean);
  return out;
}

}  // namespace sche
