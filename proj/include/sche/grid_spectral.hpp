#pragma once

// Midpoint grid on (0, pi), discrete Neumann Laplacian A_N and its cosine
// eigenbasis. All inner products use the quadrature weight pi/N so the
// sampled cosines are exactly orthonormal.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace sche {

/// Nodal values at the N grid midpoints.
struct Field {
  std::vector<double> values;

  Field() = default;
  explicit Field(std::size_t n, double fill = 0.0) : values(n, fill) {}
  explicit Field(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const noexcept { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  bool operator==(const Field&) const = default;
};

/// Coordinates in the discrete eigenbasis {phi_{N,j}}.
struct SpectralField {
  std::vector<double> coeffs;

  SpectralField() = default;
  explicit SpectralField(std::size_t n, double fill = 0.0) : coeffs(n, fill) {}
  explicit SpectralField(std::vector<double> c) : coeffs(std::move(c)) {}

  std::size_t size() const noexcept { return coeffs.size(); }
  double& operator[](std::size_t j) { return coeffs[j]; }
  double operator[](std::size_t j) const { return coeffs[j]; }
  bool operator==(const SpectralField&) const = default;
};

/// Closed-form eigenvalue of -A_N: 4 N^2 pi^-2 sin^2(j pi / 2N).
inline double discrete_eigenvalue(int n_modes, int j) {
  const double n = n_modes;
  const double s = std::sin(j * std::numbers::pi / (2.0 * n));
  return 4.0 * n * n / (std::numbers::pi * std::numbers::pi) * s * s;
}

/// Continuum eigenfunction phi_j of the Neumann Laplacian on (0, pi).
inline double cosine_mode(int j, double x) {
  if (j == 0) return std::sqrt(1.0 / std::numbers::pi);
  return std::sqrt(2.0 / std::numbers::pi) * std::cos(j * x);
}

/// cos(2 pi k / m) with the angle reduced exactly to [0, pi/4] in integer
/// arithmetic, so the result carries a relative error of a few ulp.
inline double cos_two_pi_ratio(long long k, long long m) {
  k %= m;
  if (k < 0) k += m;
  if (2 * k > m) k = m - k;  // cos(2pi - a) = cos(a)
  double sign = 1.0;
  if (4 * k > m) {  // cos(pi - a) = -cos(a)
    k = m - 2 * k;
    m *= 2;
    sign = -1.0;
  }
  // now 2 pi k / m lies in [0, pi/2]
  if (8 * k > m) return sign * std::sin(2.0 * std::numbers::pi * static_cast<double>(m - 4 * k) /
                                          static_cast<double>(4 * m));
  return sign * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m));
}

/// Spatial discretization for a fixed N. Immutable after construction, so a
/// single instance can be shared by any number of trajectory workers.
class SpectralBasis {
 public:
  explicit SpectralBasis(int n_modes) : n_(n_modes) {
    if (n_modes < 2)
      throw std::invalid_argument("n_modes must be >= 2 (noise needs mode j=1), got " +
                                  std::to_string(n_modes));
    const auto n = static_cast<std::size_t>(n_);
    h_ = std::numbers::pi / n_;
    grid_.resize(n);
    for (std::size_t i = 0; i < n; ++i) grid_[i] = (static_cast<double>(i) + 0.5) * h_;
    eigenvalues_.resize(n);
    for (int j = 0; j < n_; ++j) eigenvalues_[j] = discrete_eigenvalue(n_, j);
    basis_.resize(n * n);
    basis_t_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        // phi_j(x_i) with j x_i = 2 pi (2i+1) j / 4N
        const double c = j == 0 ? std::sqrt(1.0 / std::numbers::pi)
                                : std::sqrt(2.0 / std::numbers::pi) *
                                      cos_two_pi_ratio(static_cast<long long>((2 * i + 1) * j),
                                                       4LL * n_);
        basis_[i * n + j] = c;
        basis_t_[j * n + i] = c;
      }
    }
  }

  int n_modes() const noexcept { return n_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_); }
  double h() const noexcept { return h_; }
  /// Quadrature weight pi/N of the discrete inner product.
  double weight() const noexcept { return h_; }
  const std::vector<double>& grid() const noexcept { return grid_; }
  const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
  double eigenvalue(int j) const { return eigenvalues_.at(static_cast<std::size_t>(j)); }

  /// C[i][j] = phi_j(x_i).
  double at(std::size_t i, std::size_t j) const { return basis_[i * size() + j]; }
  /// Nodal samples of phi_{N,j}.
  Field mode(int j) const {
    Field f(size());
    for (std::size_t i = 0; i < size(); ++i) f[i] = at(i, static_cast<std::size_t>(j));
    return f;
  }

  const double* row(std::size_t i) const { return basis_.data() + i * size(); }
  const double* column(std::size_t j) const { return basis_t_.data() + j * size(); }

 private:
  int n_;
  double h_ = 0.0;
  std::vector<double> grid_;
  std::vector<double> eigenvalues_;
  std::vector<double> basis_;    // row-major, row i = grid point
  std::vector<double> basis_t_;  // row-major, row j = mode
};

inline SpectralBasis build_basis(int n_modes) { return SpectralBasis(n_modes); }

namespace detail {
inline void check_size(const SpectralBasis& basis, std::size_t n, const char* what) {
  if (n != basis.size())
    throw std::invalid_argument(std::string(what) + ": length " + std::to_string(n) +
                                " does not match n_modes " + std::to_string(basis.size()));
}
}  // namespace detail

/// A_N u by the explicit three-point stencil with Neumann end rows. Kept
/// independent of the spectral route so it can serve as its oracle.
inline Field apply_laplacian(const SpectralBasis& basis, const Field& u) {
  detail::check_size(basis, u.size(), "apply_laplacian");
  const std::size_t n = u.size();
  const double scale = 1.0 / (basis.h() * basis.h());
  Field out(n);
  out[0] = scale * (u[1] - u[0]);
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = scale * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
  out[n - 1] = scale * (u[n - 2] - u[n - 1]);
  return out;
}

/// coeffs[j] = (pi/N) sum_i u_i phi_j(x_i). Writes into `out` to allow reuse.
inline void to_spectral(const SpectralBasis& basis, const Field& u, SpectralField& out) {
  detail::check_size(basis, u.size(), "to_spectral");
  const std::size_t n = basis.size();
  out.coeffs.assign(n, 0.0);
  double* acc = out.coeffs.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double ui = u[i];
    const double* r = basis.row(i);
    for (std::size_t j = 0; j < n; ++j) acc[j] += ui * r[j];
  }
  const double w = basis.weight();
  for (std::size_t j = 0; j < n; ++j) acc[j] *= w;
}

inline SpectralField to_spectral(const SpectralBasis& basis, const Field& u) {
  SpectralField c;
  to_spectral(basis, u, c);
  return c;
}

/// u_i = sum_j c_j phi_j(x_i).
inline void from_spectral(const SpectralBasis& basis, const SpectralField& c, Field& out) {
  detail::check_size(basis, c.size(), "from_spectral");
  const std::size_t n = basis.size();
  out.values.assign(n, 0.0);
  double* acc = out.values.data();
  for (std::size_t j = 0; j < n; ++j) {
    const double cj = c[j];
    if (cj == 0.0) continue;
    const double* col = basis.column(j);
    for (std::size_t i = 0; i < n; ++i) acc[i] += cj * col[i];
  }
}

inline Field from_spectral(const SpectralBasis& basis, const SpectralField& c) {
  Field u;
  from_spectral(basis, c, u);
  return u;
}

/// Diagonal of exp(-A_N^2 t) in the eigenbasis.
inline std::vector<double> semigroup_factor(const SpectralBasis& basis, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("semigroup_factor: t must be >= 0");
  std::vector<double> out(basis.size());
  out[0] = 1.0;
  for (std::size_t j = 1; j < out.size(); ++j) {
    const double lam = basis.eigenvalues()[j];
    out[j] = std::exp(-lam * lam * t);
  }
  return out;
}

enum class NormKind { l2, l_inf, l_p, w12 };

/// Discrete norms; `p` is read only for NormKind::l_p.
inline double norm(const SpectralBasis& basis, const Field& u, NormKind kind, double p = 2.0) {
  detail::check_size(basis, u.size(), "norm");
  switch (kind) {
    case NormKind::l2: {
      double s = 0.0;
      for (double v : u.values) s += v * v;
      return std::sqrt(basis.weight() * s);
    }
    case NormKind::l_inf: {
      double m = 0.0;
      for (double v : u.values) m = std::max(m, std::abs(v));
      return m;
    }
    case NormKind::l_p: {
      if (!(p >= 1.0)) throw std::invalid_argument("norm: l_p requires p >= 1");
      double s = 0.0;
      for (double v : u.values) s += std::pow(std::abs(v), p);
      return std::pow(basis.weight() * s, 1.0 / p);
    }
    case NormKind::w12: {
      const SpectralField c = to_spectral(basis, u);
      double grad = 0.0;
      for (std::size_t j = 1; j < c.size(); ++j) grad += basis.eigenvalues()[j] * c[j] * c[j];
      const double l2 = norm(basis, u, NormKind::l2);
      return std::sqrt(l2 * l2 + grad);
    }
  }
  throw std::invalid_argument("norm: unknown kind");
}

/// Squared w^{1,2}_N norm straight from coefficients (Parseval).
inline double w12_norm_squared(const SpectralBasis& basis, const SpectralField& c) {
  const auto& lam = basis.eigenvalues();
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) s += (1.0 + lam[j]) * c[j] * c[j];
  return s;
}

/// Piecewise-linear interpolant P_N u, constant on [0, x_1] and [x_N, pi].
inline double interpolate(const SpectralBasis& basis, const Field& u, double x) {
  detail::check_size(basis, u.size(), "interpolate");
  if (!(x >= 0.0 && x <= std::numbers::pi))
    throw std::out_of_range("interpolate: x outside [0, pi]");
  const auto& g = basis.grid();
  const std::size_t n = u.size();
  if (x <= g.front()) return u[0];
  if (x >= g.back()) return u[n - 1];
  const double h = basis.h();
  auto i = static_cast<std::size_t>(std::floor((x - g.front()) / h));
  if (i > n - 2) i = n - 2;
  if (x < g[i]) --i;
  if (x >= g[i + 1] && i + 2 < n) ++i;
  if (x == g[i]) return u[i];
  if (x == g[i + 1]) return u[i + 1];
  return u[i] + (x - g[i]) / h * (u[i + 1] - u[i]);
}

/// Samples a continuum function at the grid midpoints (the operator S_N).
template <class F>
Field sample(const SpectralBasis& basis, F&& fn) {
  Field out(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) out[i] = fn(basis.grid()[i]);
  return out;
}

}  // namespace sche
