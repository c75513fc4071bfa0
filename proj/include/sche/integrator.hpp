#pragma once

// Strongly tamed exponential Euler scheme for the stochastic Cahn-Hilliard
// equation in spectral form:
//
//   c_j <- exp(-lambda_j^2 tau) (c_j - tau lambda_j f_j + sigma dbeta_j),
//
// where f_j are the coefficients of the nodal cubic drift divided by the
// taming factor 1 + tau ||u||_{w12}^12. Mode 0 is never touched, so the mass
// is conserved bit for bit.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid_spectral.hpp"
#include "noise.hpp"

namespace sche {

/// f(x) = a0 x^3 + a1 x^2 + a2 x + a3.
struct DriftSpec {
  double a0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;

  double operator()(double x) const { return ((a0 * x + a1) * x + a2) * x + a3; }
  double derivative(double x) const { return (3.0 * a0 * x + 2.0 * a1) * x + a2; }
  bool is_zero() const { return a0 == 0.0 && a1 == 0.0 && a2 == 0.0 && a3 == 0.0; }
  /// Constant state fixed by the symmetry argument: -a1 / (3 a0).
  double symmetric_mass() const { return -a1 / (3.0 * a0); }
  bool operator==(const DriftSpec&) const = default;
};

/// The drift of the standard test problem: f(u) = (u^3 - u^2 + 2u - 2) / 2.
inline constexpr DriftSpec kExampleDrift{0.5, -0.5, 1.0, -1.0};

/// u0(x) = c_0 + sum_{k>=1} c_k cos(k x); the initial-condition descriptor
/// used by configs and experiments.
struct CosineSeries {
  std::vector<double> coeffs;

  double operator()(double x) const {
    double v = coeffs.empty() ? 0.0 : coeffs[0];
    for (std::size_t k = 1; k < coeffs.size(); ++k) v += coeffs[k] * std::cos(static_cast<double>(k) * x);
    return v;
  }
  double mean() const { return coeffs.empty() ? 0.0 : coeffs[0]; }
  Field sample(const SpectralBasis& basis) const {
    return sche::sample(basis, [this](double x) { return (*this)(x); });
  }
  bool operator==(const CosineSeries&) const = default;
};

inline Field eval_drift(const DriftSpec& drift, const Field& u) {
  Field out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = drift(u[i]);
  return out;
}

struct SchemeParams {
  double tau = 0.01;
  std::shared_ptr<const SpectralBasis> basis;
  double sigma = 1.0;
  DriftSpec drift = kExampleDrift;
  Field initial;
  /// Permits a0 == 0 (linear or zero drift) for exact-solution checks.
  bool validation = false;
};

/// Throws std::invalid_argument listing every violated parameter domain.
inline void validate(const SchemeParams& p) {
  std::vector<std::string> errors;
  if (!p.basis) errors.emplace_back("basis is missing");
  if (!(p.tau > 0.0 && p.tau < 1.0)) errors.emplace_back("tau must lie in (0,1)");
  if (!(p.sigma >= 0.0) || !std::isfinite(p.sigma)) errors.emplace_back("sigma must be >= 0");
  if (p.drift.a0 < 0.0) errors.emplace_back("a0 must be >= 0");
  if (p.drift.a0 == 0.0 && !p.validation)
    errors.emplace_back("a0 must be > 0 outside validation mode");
  if (p.basis && p.initial.size() != p.basis->size())
    errors.emplace_back("initial field length does not match n_modes");
  for (double v : p.initial.values)
    if (!std::isfinite(v)) {
      errors.emplace_back("initial field has non-finite entries");
      break;
    }
  if (errors.empty()) return;
  std::string msg = "invalid scheme parameters:";
  for (const auto& e : errors) msg += " " + e + ";";
  throw std::invalid_argument(msg);
}

/// Checks h^-1 tau^9 <= 1, under which the strong rates are expected.
inline std::optional<std::string> convergence_constraint_warning(double tau, int n_modes) {
  const double h = std::numbers::pi / n_modes;
  const double v = std::pow(tau, 9.0) / h;
  if (v <= 1.0) return std::nullopt;
  std::ostringstream os;
  os << "h^-1 tau^9 = " << v << " exceeds 1 (tau = " << tau << ", N = " << n_modes << ")";
  return os.str();
}

/// L_f = -sup f' over a uniform grid of `samples` points on [-radius, radius].
inline double drift_lipschitz_margin(const DriftSpec& drift, double radius, int samples = 10000) {
  double sup = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    const double x = -radius + 2.0 * radius * k / (samples - 1);
    sup = std::max(sup, drift.derivative(x));
  }
  return -sup;
}

/// Warns when L_f < lambda_{N,1} fails on the checked interval.
inline std::optional<std::string> dissipativity_warning(const DriftSpec& drift,
                                                        const SpectralBasis& basis, double radius) {
  const double lf = drift_lipschitz_margin(drift, radius);
  const double lam1 = basis.eigenvalue(1);
  if (lf < lam1) return std::nullopt;
  std::ostringstream os;
  os << "L_f = " << lf << " on [-" << radius << ", " << radius << "] is not below lambda_{N,1} = " << lam1;
  return os.str();
}

/// 1 + tau ||u||_{w12}^12.
inline double taming_denominator(const SchemeParams& params, const Field& u) {
  const double n = norm(*params.basis, u, NormKind::w12);
  return 1.0 + params.tau * std::pow(n * n, 6);
}

struct SchemeState {
  std::int64_t step_index = 0;
  SpectralField coeffs;
  /// Spatial mean of the initial field, c_0 / sqrt(pi).
  double mass0 = 0.0;

  bool operator==(const SchemeState&) const = default;
};

inline SchemeState initial_state(const SchemeParams& params) {
  validate(params);
  SchemeState s;
  s.coeffs = to_spectral(*params.basis, params.initial);
  s.mass0 = s.coeffs[0] / std::sqrt(std::numbers::pi);
  return s;
}

/// Reusable stepper holding per-trajectory workspace. Not shared between
/// threads; the basis it points to is.
class TamedExponentialEuler {
 public:
  explicit TamedExponentialEuler(SchemeParams params) : p_(std::move(params)) {
    validate(p_);
    const auto& lam = p_.basis->eigenvalues();
    decay_ = semigroup_factor(*p_.basis, p_.tau);
    drift_gain_.resize(lam.size());
    for (std::size_t j = 0; j < lam.size(); ++j) drift_gain_[j] = p_.tau * lam[j];
  }

  const SchemeParams& params() const noexcept { return p_; }

  /// One step in place. `noise` holds Delta beta_{j,m} (entry 0 ignored).
  void advance(SchemeState& state, const SpectralField& noise) {
    const SpectralBasis& basis = *p_.basis;
    const std::size_t n = basis.size();
    detail::check_size(basis, state.coeffs.size(), "step state");
    detail::check_size(basis, noise.size(), "step noise");
    auto& c = state.coeffs;

    const bool has_drift = !p_.drift.is_zero();
    double inv_tame = 0.0;
    if (has_drift) {
      from_spectral(basis, c, nodal_);
      for (double& v : nodal_.values) v = p_.drift(v);
      to_spectral(basis, nodal_, drift_coeffs_);
      const double w12sq = w12_norm_squared(basis, c);
      inv_tame = 1.0 / (1.0 + p_.tau * std::pow(w12sq, 6));
    }
    // j = 0: lambda = 0 and exp(0) = 1, so c_0 is left exactly as is.
    for (std::size_t j = 1; j < n; ++j) {
      double v = c[j] + p_.sigma * noise[j];
      if (has_drift) v -= drift_gain_[j] * drift_coeffs_[j] * inv_tame;
      c[j] = decay_[j] * v;
    }
    ++state.step_index;
    for (std::size_t j = 1; j < n; ++j)
      if (!std::isfinite(c[j]))
        throw std::runtime_error("non-finite state after step " + std::to_string(state.step_index - 1));
  }

 private:
  SchemeParams p_;
  std::vector<double> decay_;
  std::vector<double> drift_gain_;
  Field nodal_;
  SpectralField drift_coeffs_;
};

inline SchemeState step(const SchemeParams& params, const SchemeState& state, const SpectralField& noise) {
  if (!noise.coeffs.empty() && noise[0] != 0.0)
    throw std::invalid_argument("step: noise entry 0 must be zero");
  TamedExponentialEuler stepper(params);
  SchemeState next = state;
  stepper.advance(next, noise);
  return next;
}

/// Called with (step index m, state at t_m).
using Observer = std::function<void(std::int64_t, const SchemeState&)>;

/// Advances `state` by n_steps, drawing Delta beta_m for coarse step m =
/// state.step_index from `src`. Observers see the starting state and every
/// state after a step. Failures are rethrown naming the trajectory.
inline SchemeState run_trajectory(const SchemeParams& params, const NoiseSource& src, SchemeState state,
                                  std::int64_t n_steps, const std::vector<Observer>& observers = {}) {
  if (n_steps < 0) throw std::invalid_argument("run_trajectory: n_steps must be >= 0");
  const std::int64_t ratio = src.ratio_for(params.tau);
  TamedExponentialEuler stepper(params);
  SpectralField noise;
  for (const auto& obs : observers) obs(state.step_index, state);
  try {
    for (std::int64_t k = 0; k < n_steps; ++k) {
      increment_field(src, *params.basis, state.step_index, ratio, noise);
      stepper.advance(state, noise);
      for (const auto& obs : observers) obs(state.step_index, state);
    }
  } catch (const std::exception& e) {
    throw std::runtime_error("trajectory " + std::to_string(src.trajectory_id()) + ": " + e.what());
  }
  return state;
}

inline SchemeState run_trajectory(const SchemeParams& params, const NoiseSource& src, std::int64_t n_steps,
                                  const std::vector<Observer>& observers = {}) {
  return run_trajectory(params, src, initial_state(params), n_steps, observers);
}

/// Step count m with t = m tau; throws when t is not on the time grid.
inline std::int64_t steps_for_time(double t, double tau) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be >= 0");
  const double m = t / tau;
  const auto mi = std::llround(m);
  if (std::abs(m - static_cast<double>(mi)) > 1e-9 * std::max(1.0, m))
    throw std::invalid_argument("t = " + std::to_string(t) + " is not a multiple of tau = " +
                                std::to_string(tau));
  return mi;
}

/// Nodal values U_{t} for t on the time grid.
inline Field solution_at(const SchemeParams& params, const NoiseSource& src, double t) {
  const auto m = steps_for_time(t, params.tau);
  const SchemeState s = run_trajectory(params, src, m);
  return from_spectral(*params.basis, s.coeffs);
}

/// P_N U_t evaluated at arbitrary points in [0, pi].
inline std::vector<double> solution_at(const SchemeParams& params, const NoiseSource& src, double t,
                                       const std::vector<double>& points) {
  const Field u = solution_at(params, src, t);
  std::vector<double> out;
  out.reserve(points.size());
  for (double x : points) out.push_back(interpolate(*params.basis, u, x));
  return out;
}

}  // namespace sche
