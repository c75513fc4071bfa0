#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sche/grid_spectral.hpp"

using namespace sche;
using std::numbers::pi;

namespace {

// Dense A_N assembled entry by entry, independent of the library stencil.
std::vector<std::vector<double>> dense_laplacian(int n) {
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  const double s = n * n / (pi * pi);
  for (int i = 0; i < n; ++i) {
    if (i > 0) a[i][i - 1] = s;
    if (i + 1 < n) a[i][i + 1] = s;
    a[i][i] = -s * ((i == 0 || i == n - 1) ? 1.0 : 2.0);
  }
  return a;
}

Field random_field(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Field u(static_cast<std::size_t>(n));
  for (auto& v : u.values) v = g(rng);
  return u;
}

}  // namespace

TEST(Eigenvalue, ZeroModeVanishes) {
  for (int n : {2, 7, 64, 1024}) EXPECT_EQ(discrete_eigenvalue(n, 0), 0.0);
}

TEST(Eigenvalue, TwoPointClosedForm) {
  EXPECT_NEAR(discrete_eigenvalue(2, 1), 8.0 / (pi * pi), 1e-15);
  EXPECT_NEAR(discrete_eigenvalue(2, 1), 0.8105694691387022, 1e-15);
}

TEST(Eigenvalue, FineGridApproachesContinuum) {
  EXPECT_LE(std::abs(discrete_eigenvalue(512, 1) - 1.0), 1e-5);
}

TEST(Eigenvalue, BoundedByContinuumWithQuarticDefect) {
  for (int n = 2; n <= 1024; n *= 2)
    for (int j = 1; j < n; ++j) {
      const double lam = discrete_eigenvalue(n, j), j2 = double(j) * j;
      EXPECT_LE(lam, j2 * (1 + 1e-14));
      EXPECT_LE(std::abs(lam - j2), j2 * j2 * pi * pi / (12.0 * n * n) * 2.0);
    }
}

TEST(Basis, ReducedCosineMatchesLongDouble) {
  for (long long m : {8LL, 12LL, 2048LL, 4096LL})
    for (long long k = -m; k <= 3 * m; k += 1 + m / 64) {
      const long double ref = std::cos(2.0L * std::numbers::pi_v<long double> * k / m);
      EXPECT_NEAR(cos_two_pi_ratio(k, m), static_cast<double>(ref), 4e-16) << k << "/" << m;
    }
}

TEST(Basis, RejectsTooFewModes) {
  EXPECT_THROW(SpectralBasis(1), std::invalid_argument);
  EXPECT_THROW(SpectralBasis(0), std::invalid_argument);
}

TEST(Basis, GridIsMidpoints) {
  const SpectralBasis b(8);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(b.grid()[i], (i + 0.5) * pi / 8, 1e-15);
  EXPECT_DOUBLE_EQ(b.weight(), pi / 8);
}

TEST(Laplacian, ConstantsInKernel) {
  const SpectralBasis b(16);
  const Field lap = apply_laplacian(b, Field(16, 3.7));
  for (double v : lap.values) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Laplacian, TwoPointByHand) {
  const SpectralBasis b(2);
  const Field lap = apply_laplacian(b, Field(std::vector<double>{1.0, -1.0}));
  EXPECT_NEAR(lap[0], -8.0 / (pi * pi), 1e-14);
  EXPECT_NEAR(lap[1], 8.0 / (pi * pi), 1e-14);
}

TEST(Laplacian, MatchesDenseMatrix) {
  std::mt19937_64 rng(5);
  for (int n : {3, 10, 33}) {
    const SpectralBasis b(n);
    const auto a = dense_laplacian(n);
    const Field u = random_field(rng, n);
    const Field lap = apply_laplacian(b, u);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += a[i][k] * u[k];
      EXPECT_NEAR(lap[i], s, 1e-10 * (1 + std::abs(s)));
    }
  }
}

TEST(Laplacian, EigenIdentity) {
  for (int n : {8, 64, 512}) {
    const SpectralBasis b(n);
    for (int j = 0; j < n; ++j) {
      const Field phi = b.mode(j);
      const Field lap = apply_laplacian(b, phi);
      double r = 0.0;
      for (int i = 0; i < n; ++i) r += std::pow(lap[i] + b.eigenvalue(j) * phi[i], 2);
      ASSERT_LE(std::sqrt(b.weight() * r), 1e-10) << "N=" << n << " j=" << j;
    }
  }
}

TEST(Laplacian, RejectsSizeMismatch) {
  const SpectralBasis b(8);
  EXPECT_THROW(apply_laplacian(b, Field(7)), std::invalid_argument);
}

TEST(Basis, ModesAreSampledCosines) {
  const SpectralBasis b(12);
  for (int j = 0; j < 12; ++j)
    for (int i = 0; i < 12; ++i) {
      const double x = (i + 0.5) * pi / 12;
      const double expect = j == 0 ? std::sqrt(1 / pi) : std::sqrt(2 / pi) * std::cos(j * x);
      EXPECT_NEAR(b.at(i, j), expect, 1e-14);
    }
}

TEST(Basis, Orthonormal) {
  for (int n : {8, 64, 512}) {
    const SpectralBasis b(n);
    double worst = 0.0;
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        double g = 0.0;
        for (int i = 0; i < n; ++i) g += b.at(i, j) * b.at(i, k);
        worst = std::max(worst, std::abs(b.weight() * g - (j == k ? 1.0 : 0.0)));
      }
    EXPECT_LE(worst, 1e-12) << "N=" << n;
  }
}

TEST(Transform, ModeSamplesMapToUnitVector) {
  const SpectralBasis b(16);
  for (int k = 0; k < 16; ++k) {
    const SpectralField c = to_spectral(b, b.mode(k));
    for (int j = 0; j < 16; ++j) EXPECT_NEAR(c[j], j == k ? 1.0 : 0.0, 1e-12);
  }
}

TEST(Transform, ConstantHasOnlyMeanMode) {
  const SpectralBasis b(10);
  const SpectralField c = to_spectral(b, Field(10, 2.5));
  EXPECT_NEAR(c[0], 2.5 * std::sqrt(pi), 1e-12);
  for (int j = 1; j < 10; ++j) EXPECT_NEAR(c[j], 0.0, 1e-12);
}

TEST(Transform, UnitVectorsGiveModes) {
  const SpectralBasis b(9);
  SpectralField e0(9);
  e0[0] = 1.0;
  for (double v : from_spectral(b, e0).values) EXPECT_NEAR(v, std::sqrt(1 / pi), 1e-15);
  for (int k = 1; k < 9; ++k) {
    SpectralField e(9);
    e[k] = 1.0;
    const Field u = from_spectral(b, e);
    for (int i = 0; i < 9; ++i) EXPECT_NEAR(u[i], std::sqrt(2 / pi) * std::cos(k * b.grid()[i]), 1e-14);
  }
}

TEST(Transform, RoundTripsBothWays) {
  std::mt19937_64 rng(11);
  for (int n : {4, 31, 128}) {
    const SpectralBasis b(n);
    const Field u = random_field(rng, n);
    const Field back = from_spectral(b, to_spectral(b, u));
    for (int i = 0; i < n; ++i) EXPECT_NEAR(back[i], u[i], 1e-12);
    const SpectralField c(random_field(rng, n).values);
    const SpectralField cb = to_spectral(b, from_spectral(b, c));
    for (int j = 0; j < n; ++j) EXPECT_NEAR(cb[j], c[j], 1e-12);
  }
}

TEST(Transform, SpectralLaplacianMatchesStencil) {
  std::mt19937_64 rng(2024);
  for (int n : {4, 16, 64}) {
    const SpectralBasis b(n);
    for (int trial = 0; trial < 200; ++trial) {
      const Field u = random_field(rng, n);
      SpectralField c = to_spectral(b, u);
      for (int j = 0; j < n; ++j) c[j] *= -b.eigenvalue(j);
      const Field spectral = from_spectral(b, c);
      const Field stencil = apply_laplacian(b, u);
      for (int i = 0; i < n; ++i) ASSERT_NEAR(spectral[i], stencil[i], 1e-9);
    }
  }
}

TEST(Transform, Parseval) {
  std::mt19937_64 rng(3);
  for (int n : {5, 64}) {
    const SpectralBasis b(n);
    const Field u = random_field(rng, n);
    const SpectralField c = to_spectral(b, u);
    double s = 0.0;
    for (double v : c.coeffs) s += v * v;
    const double l2 = norm(b, u, NormKind::l2);
    EXPECT_NEAR(s, l2 * l2, 1e-10 * l2 * l2);
  }
}

TEST(Semigroup, IdentityAtZeroTime) {
  const SpectralBasis b(16);
  for (double v : semigroup_factor(b, 0.0)) EXPECT_EQ(v, 1.0);
}

TEST(Semigroup, MeanModeAlwaysOne) {
  const SpectralBasis b(16);
  for (double t : {1e-3, 1.0, 1e3}) EXPECT_EQ(semigroup_factor(b, t)[0], 1.0);
}

TEST(Semigroup, TwoPointValue) {
  const SpectralBasis b(2);
  EXPECT_NEAR(semigroup_factor(b, 1.0)[1], std::exp(-64 / std::pow(pi, 4)), 1e-15);
  EXPECT_NEAR(semigroup_factor(b, 1.0)[1], 0.518392, 1e-6);
}

TEST(Semigroup, RejectsNegativeTime) {
  const SpectralBasis b(4);
  EXPECT_THROW(semigroup_factor(b, -1e-9), std::invalid_argument);
}

TEST(Semigroup, SmoothingIsMonotone) {
  std::mt19937_64 rng(8);
  const SpectralBasis b(32);
  Field u = random_field(rng, 32);
  double m = 0.0;
  for (double v : u.values) m += v / 32;
  for (auto& v : u.values) v -= m;
  const SpectralField c = to_spectral(b, u);
  for (double gamma : {0.0, 0.5, 1.0, 2.0}) {
    double prev = INFINITY;
    for (double t = 0.0; t <= 2.0; t += 0.01) {
      const auto e = semigroup_factor(b, t);
      double s = 0.0;
      for (int j = 1; j < 32; ++j) s += std::pow(b.eigenvalue(j), 2 * gamma) * std::pow(e[j] * c[j], 2);
      EXPECT_LE(s, prev);
      prev = s;
    }
  }
}

TEST(Norm, ConstantField) {
  const SpectralBasis b(20);
  EXPECT_NEAR(norm(b, Field(20, 1.0), NormKind::l2), std::sqrt(pi), 1e-13);
  EXPECT_NEAR(norm(b, Field(20, -3.0), NormKind::w12), 3.0 * std::sqrt(pi), 1e-12);
  EXPECT_NEAR(norm(b, Field(20, -3.0), NormKind::l_inf), 3.0, 0.0);
  EXPECT_NEAR(norm(b, Field(20, 2.0), NormKind::l_p, 3.0), 2.0 * std::cbrt(pi), 1e-13);
}

TEST(Norm, FirstModeW12) {
  const SpectralBasis b(24);
  EXPECT_NEAR(norm(b, b.mode(1), NormKind::w12), std::sqrt(1 + b.eigenvalue(1)), 1e-10);
}

TEST(Norm, LpRequiresPAtLeastOne) {
  const SpectralBasis b(4);
  EXPECT_THROW(norm(b, Field(4, 1.0), NormKind::l_p, 0.5), std::invalid_argument);
}

TEST(Interpolate, NodesAndEnds) {
  std::mt19937_64 rng(4);
  const SpectralBasis b(7);
  const Field u = random_field(rng, 7);
  for (int i = 0; i < 7; ++i) EXPECT_EQ(interpolate(b, u, b.grid()[i]), u[i]);
  EXPECT_EQ(interpolate(b, u, 0.0), u[0]);
  EXPECT_EQ(interpolate(b, u, pi), u[6]);
  EXPECT_EQ(interpolate(b, u, 0.5 * b.grid()[0]), u[0]);
  for (int i = 0; i + 1 < 7; ++i)
    EXPECT_NEAR(interpolate(b, u, 0.5 * (b.grid()[i] + b.grid()[i + 1])), 0.5 * (u[i] + u[i + 1]), 1e-14);
}

TEST(Interpolate, RejectsOutsideDomain) {
  const SpectralBasis b(4);
  EXPECT_THROW(interpolate(b, Field(4), -1e-3), std::out_of_range);
  EXPECT_THROW(interpolate(b, Field(4), pi + 1e-3), std::out_of_range);
}
