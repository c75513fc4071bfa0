#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sche/noise.hpp"

using namespace sche;

// Random123 known-answer vectors for Philox4x32-10.
TEST(Philox, KnownAnswers) {
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}),
            (Philox4x32Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (Philox4x32Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (Philox4x32Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(NoiseSource, RejectsBadConstruction) {
  EXPECT_THROW(NoiseSource(1, 0, 0.0, 4), std::invalid_argument);
  EXPECT_THROW(NoiseSource(1, 0, -1.0, 4), std::invalid_argument);
  EXPECT_THROW(NoiseSource(1, 0, 0.1, 0), std::invalid_argument);
  EXPECT_THROW(NoiseSource(1, 1ULL << 32, 0.1, 4), std::invalid_argument);
}

TEST(NoiseSource, ModeChecks) {
  const NoiseSource src(1, 0, 0.01, 4);
  EXPECT_THROW(src.fine_increment(0, 0), std::invalid_argument);
  EXPECT_THROW(src.fine_increment(5, 0), std::out_of_range);
  EXPECT_THROW(src.fine_increment(-1, 0), std::out_of_range);
  EXPECT_THROW(src.fine_increment(1, -1), std::invalid_argument);
}

TEST(NoiseSource, Deterministic) {
  const NoiseSource a(77, 3, 0.01, 8), b(77, 3, 0.01, 8);
  for (int j = 1; j <= 8; ++j)
    for (std::int64_t k = 0; k < 100; ++k) ASSERT_EQ(a.fine_increment(j, k), b.fine_increment(j, k));
}

TEST(NoiseSource, SeedAndTrajectoryChangeStream) {
  const NoiseSource a(77, 3, 0.01, 8);
  EXPECT_NE(a.fine_increment(1, 0), NoiseSource(78, 3, 0.01, 8).fine_increment(1, 0));
  EXPECT_NE(a.fine_increment(1, 0), a.with_trajectory(4).fine_increment(1, 0));
}

TEST(NoiseSource, FineMomentsMatchBrownianIncrement) {
  const double tau = 1e-3;
  const NoiseSource src(20251016, 0, tau, 1);
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x = src.fine_increment(1, k);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  EXPECT_LE(std::abs(mean), 4.0 * std::sqrt(tau / n));
  EXPECT_NEAR(var / tau, 1.0, 0.05);
}

TEST(NoiseSource, CoarseRatioOneIsFine) {
  const NoiseSource src(5, 0, 0.01, 3);
  for (std::int64_t m = 0; m < 50; ++m) EXPECT_EQ(src.coarse_increment(2, m, 1), src.fine_increment(2, m));
}

TEST(NoiseSource, CoarseIsExactSumOfFine) {
  const NoiseSource src(5, 1, 1.0 / 4096, 3);
  for (std::int64_t m = 0; m < 200; ++m) {
    double fine = 0.0;
    for (int k = 0; k < 4; ++k) fine += src.fine_increment(3, 4 * m + k);
    ASSERT_EQ(src.coarse_increment(3, m, 4), fine);
  }
}

TEST(NoiseSource, RefinementExactUnderAnyGrouping) {
  const NoiseSource src(9, 2, 1.0 / 8192, 5);
  for (int r1 : {1, 2, 4, 8})
    for (int r2 : {1, 2, 4, 8}) {
      for (std::int64_t m = 0; m < 40; ++m) {
        double mid = 0.0;
        for (int q = 0; q < r2; ++q) mid += src.coarse_increment(4, m * r2 + q, r1);
        ASSERT_EQ(mid, src.coarse_increment(4, m, r1 * r2)) << r1 << "x" << r2;
      }
    }
}

TEST(NoiseSource, CoarseVarianceAdds) {
  const double tau = 1e-3;
  const NoiseSource src(31, 0, tau, 1);
  const int n = 50000;
  double s2 = 0.0;
  for (int m = 0; m < n; ++m) s2 += std::pow(src.coarse_increment(1, m, 4), 2);
  EXPECT_NEAR(s2 / n / (4 * tau), 1.0, 0.05);
}

TEST(NoiseSource, CoarseStepOverflowDetected) {
  const NoiseSource src(1, 0, 0.5, 1);
  EXPECT_THROW(src.coarse_increment(1, std::numeric_limits<std::int64_t>::max() / 2, 4), std::overflow_error);
}

TEST(NoiseSource, RatioFor) {
  const NoiseSource src(1, 0, 1.0 / 1024, 1);
  EXPECT_EQ(src.ratio_for(1.0 / 64), 16);
  EXPECT_EQ(src.ratio_for(1.0 / 1024), 1);
  EXPECT_THROW(src.ratio_for(1.5 / 1024), std::invalid_argument);
  EXPECT_THROW(src.ratio_for(1.0 / 2048), std::invalid_argument);
}

TEST(NoiseSource, TrajectoriesUncorrelated) {
  const NoiseSource a(12, 0, 1.0, 1), b = a.with_trajectory(1);
  const int n = 10000;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x = a.fine_increment(1, k), y = b.fine_increment(1, k);
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  EXPECT_LE(std::abs(sab / std::sqrt(saa * sbb)), 0.05);
}

TEST(IncrementField, MeanModeIsZero) {
  const NoiseSource src(3, 0, 0.01, 15);
  const SpectralBasis b(16);
  for (std::int64_t m = 0; m < 20; ++m) EXPECT_EQ(increment_field(src, b, m, 1)[0], 0.0);
}

TEST(IncrementField, TruncationCouplesResolutions) {
  const NoiseSource src(3, 0, 0.01, 63);
  const SpectralBasis b8(8), b64(64);
  for (std::int64_t m = 0; m < 20; ++m) {
    const auto a = increment_field(src, b8, m, 2), c = increment_field(src, b64, m, 2);
    for (int j = 1; j < 8; ++j) ASSERT_EQ(a[j], c[j]);
  }
}

TEST(IncrementField, RejectsBasisLargerThanSource) {
  const NoiseSource src(3, 0, 0.01, 7);
  EXPECT_NO_THROW(increment_field(src, SpectralBasis(8), 0, 1));
  EXPECT_THROW(increment_field(src, SpectralBasis(9), 0, 1), std::invalid_argument);
}

TEST(IncrementField, ExpectedSquaredNorm) {
  const double tau = 1e-2;
  const int n = 16, r = 2, samples = 20000;
  const NoiseSource src(44, 0, tau, n - 1);
  const SpectralBasis b(n);
  double s = 0.0;
  for (int m = 0; m < samples; ++m) {
    const auto inc = increment_field(src, b, m, r);
    for (double c : inc.coeffs) s += c * c;
  }
  EXPECT_NEAR(s / samples / ((n - 1) * r * tau), 1.0, 0.05);
}

// o_{m+1} = e^{-lam^2 tau} (o_m + sigma dB_m) has stationary variance
// sigma^2 tau q / (1 - q), q = e^{-2 lam^2 tau} (geometric series).
TEST(IncrementField, StochasticConvolutionStationaryVariance) {
  const int n = 8;
  const double tau = 0.05, sigma = 1.0;
  const SpectralBasis b(n);
  const NoiseSource src(20251016, 0, tau, n - 1);
  for (int j : {1, 2}) {
    const double lam = b.eigenvalue(j), e = std::exp(-lam * lam * tau), q = e * e;
    const double target = sigma * sigma * tau * q / (1 - q);
    double o = 0.0, s2 = 0.0;
    const int burn = 2000, samples = 200000;
    for (int m = 0; m < burn + samples; ++m) {
      o = e * (o + sigma * src.coarse_increment(j, m, 1));
      if (m >= burn) s2 += o * o;
    }
    EXPECT_NEAR(s2 / samples / target, 1.0, 0.05) << "mode " << j;
  }
}
