#pragma once

// Addressable Brownian increments for the cylindrical Wiener process.
//
// Every fine increment is a pure function of (seed, trajectory_id, mode,
// step), produced by Philox4x32-10 in counter mode followed by a Box-Muller
// transform. Increments are stored as integer multiples of a power-of-two
// quantum so that coarse increments (sums of fine ones) are exact and
// independent of how the summation is grouped.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "grid_spectral.hpp"

namespace sche {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., Random123).
inline Philox4x32Counter philox4x32_10(Philox4x32Counter ctr, Philox4x32Key key) {
  constexpr std::uint64_t kM0 = 0xD2511F53u;
  constexpr std::uint64_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = kM0 * ctr[0];
    const std::uint64_t p1 = kM1 * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

/// Two 53-bit uniforms in (0,1) from one Philox block, then the cosine branch
/// of Box-Muller. Fixed so results are reproducible across builds.
inline double standard_normal_from_block(const Philox4x32Counter& block) {
  const std::uint64_t a = (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
  const std::uint64_t b = (static_cast<std::uint64_t>(block[2]) << 32) | block[3];
  constexpr double kScale = 0x1.0p-53;
  const double u1 = (static_cast<double>(a >> 11) + 0.5) * kScale;
  const double u2 = (static_cast<double>(b >> 11) + 0.5) * kScale;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

class NoiseSource {
 public:
  NoiseSource(std::uint64_t seed, std::uint64_t trajectory_id, double tau_fine, int n_modes_max)
      : seed_(seed), trajectory_id_(trajectory_id), tau_fine_(tau_fine), n_modes_max_(n_modes_max) {
    if (!(tau_fine > 0.0) || !std::isfinite(tau_fine))
      throw std::invalid_argument("NoiseSource: tau_fine must be positive");
    if (n_modes_max < 1) throw std::invalid_argument("NoiseSource: n_modes_max must be >= 1");
    if (trajectory_id > std::numeric_limits<std::uint32_t>::max())
      throw std::invalid_argument("NoiseSource: trajectory_id must fit in 32 bits");
    sqrt_tau_ = std::sqrt(tau_fine);
    // Increments are |Z| <= 8.6 standard deviations, so |quanta| < 2^45 and
    // sums of up to 2^8 fine steps are exact even in the worst case.
    quantum_ = std::ldexp(1.0, std::ilogb(sqrt_tau_) - 40);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t trajectory_id() const noexcept { return trajectory_id_; }
  double tau_fine() const noexcept { return tau_fine_; }
  int n_modes_max() const noexcept { return n_modes_max_; }
  double quantum() const noexcept { return quantum_; }

  /// The same source for another trajectory.
  NoiseSource with_trajectory(std::uint64_t id) const {
    return NoiseSource(seed_, id, tau_fine_, n_modes_max_);
  }

  /// Fine increment in units of quantum().
  std::int64_t fine_quanta(int mode, std::int64_t step) const {
    check_mode(mode);
    if (step < 0) throw std::invalid_argument("NoiseSource: negative step index");
    const auto k = static_cast<std::uint64_t>(step);
    const Philox4x32Counter ctr = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                                   static_cast<std::uint32_t>(mode),
                                   static_cast<std::uint32_t>(trajectory_id_)};
    const Philox4x32Key key = {static_cast<std::uint32_t>(seed_),
                               static_cast<std::uint32_t>(seed_ >> 32)};
    const double z = standard_normal_from_block(philox4x32_10(ctr, key));
    return std::llround(sqrt_tau_ * z / quantum_);
  }

  /// Delta beta_{j,k} over one fine step; distributed N(0, tau_fine).
  double fine_increment(int mode, std::int64_t step) const {
    return static_cast<double>(fine_quanta(mode, step)) * quantum_;
  }

  /// Sum of the `ratio` fine increments covering coarse step m.
  double coarse_increment(int mode, std::int64_t coarse_step, std::int64_t ratio) const {
    if (ratio < 1) throw std::invalid_argument("NoiseSource: ratio must be >= 1");
    if (coarse_step < 0) throw std::invalid_argument("NoiseSource: negative coarse step");
    constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
    if (coarse_step > (kMax - ratio) / ratio)
      throw std::overflow_error("NoiseSource: fine step index overflows at coarse step " +
                                std::to_string(coarse_step));
    const std::int64_t first = coarse_step * ratio;
    std::int64_t total = 0;
    for (std::int64_t k = first; k < first + ratio; ++k) total += fine_quanta(mode, k);
    return static_cast<double>(total) * quantum_;
  }

  /// Integer r with tau = r * tau_fine; throws if tau is not such a multiple.
  std::int64_t ratio_for(double tau) const {
    const double r = tau / tau_fine_;
    const auto ri = std::llround(r);
    if (ri < 1 || std::abs(r - static_cast<double>(ri)) > 1e-9 * static_cast<double>(ri))
      throw std::invalid_argument("NoiseSource: tau = " + std::to_string(tau) +
                                  " is not an integer multiple of tau_fine = " +
                                  std::to_string(tau_fine_));
    return ri;
  }

 private:
  void check_mode(int mode) const {
    if (mode == 0) throw std::invalid_argument("NoiseSource: mode 0 carries no noise");
    if (mode < 0 || mode > n_modes_max_)
      throw std::out_of_range("NoiseSource: mode " + std::to_string(mode) + " outside 1.." +
                              std::to_string(n_modes_max_));
  }

  std::uint64_t seed_;
  std::uint64_t trajectory_id_;
  double tau_fine_;
  int n_modes_max_;
  double sqrt_tau_ = 0.0;
  double quantum_ = 0.0;
};

/// Spectral coefficients of Delta beta_m restricted to modes 0..N-1. Entry 0
/// is always zero; truncation couples bases of different N.
inline void increment_field(const NoiseSource& src, const SpectralBasis& basis,
                            std::int64_t coarse_step, std::int64_t ratio, SpectralField& out) {
  if (basis.n_modes() - 1 > src.n_modes_max())
    throw std::invalid_argument("increment_field: basis with N = " + std::to_string(basis.n_modes()) +
                                " needs modes beyond the source's n_modes_max = " +
                                std::to_string(src.n_modes_max()));
  out.coeffs.assign(basis.size(), 0.0);
  for (int j = 1; j < basis.n_modes(); ++j)
    out[static_cast<std::size_t>(j)] = src.coarse_increment(j, coarse_step, ratio);
}

inline SpectralField increment_field(const NoiseSource& src, const SpectralBasis& basis,
                                     std::int64_t coarse_step, std::int64_t ratio) {
  SpectralField out;
  increment_field(src, basis, coarse_step, ratio, out);
  return out;
}

}  // namespace sche
