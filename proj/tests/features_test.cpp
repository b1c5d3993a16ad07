#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "phsar/error.hpp"
#include "phsar/features.hpp"

namespace phsar {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> random_patch(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(static_cast<std::size_t>(n) * n);
  for (double& v : p) v = u(rng);
  return p;
}

// new(x, y) = old(y, n-1-x): gradient direction turns by +90 degrees.
std::vector<double> rotate90(const std::vector<double>& p, int n) {
  std::vector<double> r(p.size());
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) r[static_cast<std::size_t>(y) * n + x] = p[static_cast<std::size_t>(n - 1 - x) * n + y];
  return r;
}

double angle_gap(double a, double b) {
  const double d = std::fmod(std::fabs(a - b), kPi);
  return std::min(d, kPi - d);
}

TEST(GradientFeatures, ConstantPatchIsDegenerate) {
  const GradientFeature g = gradient_features(std::vector<double>(25, 0.4), 5);
  EXPECT_EQ(g.angle, 0.0);
  EXPECT_EQ(g.strength, 0.0);
  EXPECT_EQ(g.coherence, 0.0);
}

TEST(GradientFeatures, HorizontalRampIsFullyCoherentAtAngleZero) {
  const int n = 7;
  std::vector<double> p(n * n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) p[y * n + x] = 0.05 * x;
  const GradientFeature g = gradient_features(p, n);
  const auto t = oracle::tensor(p, n);
  const auto eig = oracle::eig2x2(t[0], t[1], t[2]);
  EXPECT_EQ(eig[1], 0.0);
  EXPECT_DOUBLE_EQ(g.coherence, 1.0);
  EXPECT_EQ(g.angle, 0.0);
  EXPECT_NEAR(g.strength, std::sqrt(eig[0]), 1e-12);
}

TEST(GradientFeatures, MatchesEigenOracleOnRandomPatches) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const int n = 3 + 2 * static_cast<int>(seed % 5);
    const auto p = random_patch(n, seed);
    const auto t = oracle::tensor(p, n);
    const StructureTensor st = structure_tensor(p, n);
    ASSERT_NEAR(st.xx, t[0], 1e-12);
    ASSERT_NEAR(st.xy, t[1], 1e-12);
    ASSERT_NEAR(st.yy, t[2], 1e-12);
    const auto eig = oracle::eig2x2(t[0], t[1], t[2]);
    const GradientFeature g = gradient_features(p, n);
    const double s1 = std::sqrt(eig[0]);
    const double s2 = std::sqrt(eig[1]);
    ASSERT_NEAR(g.strength, s1, 1e-10);
    ASSERT_NEAR(g.coherence, (s1 - s2) / (s1 + s2), 1e-9);
    ASSERT_LT(angle_gap(g.angle, eig[2]), 1e-8);
    ASSERT_GE(g.angle, 0.0);
    ASSERT_LT(g.angle, kPi);
    // Trace identity: lambda1 + lambda2 = sum gx^2 + sum gy^2.
    const double l2 = std::pow(g.strength * (1 - g.coherence) / (1 + g.coherence), 2);
    ASSERT_NEAR(g.strength * g.strength + l2, st.xx + st.yy, 1e-10 * (1 + st.xx + st.yy));
  }
}

TEST(GradientFeatures, RotationBy90ShiftsAngleOnly) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int n = 5 + 2 * static_cast<int>(seed % 3);
    const auto p = random_patch(n, 100 + seed);
    const GradientFeature a = gradient_features(p, n);
    const GradientFeature b = gradient_features(rotate90(p, n), n);
    ASSERT_NEAR(b.strength, a.strength, 1e-10);
    ASSERT_NEAR(b.coherence, a.coherence, 1e-10);
    ASSERT_LT(angle_gap(b.angle, a.angle + kPi / 2), 1e-10);
  }
}

TEST(GradientFeatures, IntensityScalingScalesStrengthOnly) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto p = random_patch(7, 300 + seed);
    const double alpha = 0.1 + 0.05 * static_cast<double>(seed);
    std::vector<double> q(p);
    for (double& v : q) v *= alpha;
    const GradientFeature a = gradient_features(p, 7);
    const GradientFeature b = gradient_features(q, 7);
    ASSERT_NEAR(b.strength, alpha * a.strength, 1e-10);
    ASSERT_NEAR(b.coherence, a.coherence, 1e-10);
    ASSERT_LT(angle_gap(b.angle, a.angle), 1e-10);
  }
}

TEST(GradientFeatures, IsotropicTensorHasZeroCoherence) {
  // Saddle x*y on a symmetric grid: sum gx^2 = sum gy^2, sum gx*gy = 0.
  const int n = 5;
  std::vector<double> p(n * n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) p[y * n + x] = 0.5 + 0.01 * (x - 2) * (y - 2);
  const GradientFeature g = gradient_features(p, n);
  EXPECT_GT(g.strength, 0.0);
  EXPECT_NEAR(g.coherence, 0.0, 1e-12);
}

TEST(AssembleFeature, Examples) {
  const FeatureWeights ones;
  EXPECT_EQ(assemble_feature({}, 0.0, ones), (FeatureVector{0, 0, 0, 0, 0}));
  const FeatureVector v = assemble_feature({kPi / 2, 1.0, 1.0}, kPi, ones);
  EXPECT_DOUBLE_EQ(v[0], 1.0);
  EXPECT_DOUBLE_EQ(v[1], 1.0);
  EXPECT_DOUBLE_EQ(v[2], -1.0);
  EXPECT_NEAR(v[3], 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(v[4], 1.0);
}

TEST(AssembleFeature, AngleIsPiPeriodicAndOnUnitCircle) {
  const FeatureWeights w{0.5, 2.0, 3.0, 0.25};
  for (double theta = 0.0; theta < kPi; theta += 0.1) {
    const FeatureVector a = assemble_feature({theta, 0.7, 0.3}, 1.0, w);
    const FeatureVector b = assemble_feature({theta + kPi, 0.7, 0.3}, 1.0, w);
    for (std::size_t i = 0; i < kFeatureDims; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
    EXPECT_NEAR(std::pow(a[2] / w.angle, 2) + std::pow(a[3] / w.angle, 2), 1.0, 1e-9);
  }
}

TEST(AssembleFeature, RejectsNegativeWeights) {
  EXPECT_THROW(assemble_feature({}, 0.0, {1, 1, -1, 1}), ArgumentError);
}

}  // namespace
}  // namespace phsar
