#include "phsar/features.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "phsar/error.hpp"

namespace phsar {

StructureTensor structure_tensor(std::span<const double> patch, int n) {
  if (n < 3 || patch.size() != static_cast<std::size_t>(n) * n) {
    throw ArgumentError("structure tensor needs a square patch of side >= 3");
  }
  StructureTensor t;
  const double* p = patch.data();
  for (int y = 0; y < n; ++y) {
    const double* row = p + static_cast<std::ptrdiff_t>(y) * n;
    const double* up = y == 0 ? row : row - n;
    const double* down = y == n - 1 ? row : row + n;
    const double yScale = (y == 0 || y == n - 1) ? 1.0 : 0.5;
    for (int x = 0; x < n; ++x) {
      double gx;
      if (x == 0) {
        gx = row[1] - row[0];
      } else if (x == n - 1) {
        gx = row[n - 1] - row[n - 2];
      } else {
        gx = 0.5 * (row[x + 1] - row[x - 1]);
      }
      const double gy = yScale * (down[x] - up[x]);
      t.xx += gx * gx;
      t.xy += gx * gy;
      t.yy += gy * gy;
    }
  }
  return t;
}

GradientFeature gradient_features(std::span<const double> patch, int patchSize) {
  const StructureTensor t = structure_tensor(patch, patchSize);
  const double half = 0.5 * (t.xx + t.yy);
  const double dev = std::hypot(0.5 * (t.xx - t.yy), t.xy);
  const double l1 = half + dev;
  const double l2 = std::max(0.0, half - dev);
  GradientFeature g;
  if (!(l1 > 0.0)) return g;

  // Eigenvector of l1, taken from whichever row of (T - l1 I) is better
  // conditioned.
  double vx;
  double vy;
  if (t.xx >= t.yy) {
    vx = l1 - t.yy;
    vy = t.xy;
  } else {
    vx = t.xy;
    vy = l1 - t.xx;
  }
  double angle = std::atan2(vy, vx);
  if (angle < 0.0) angle += std::numbers::pi;
  if (angle >= std::numbers::pi) angle -= std::numbers::pi;

  const double s1 = std::sqrt(l1);
  const double s2 = std::sqrt(l2);
  g.angle = angle;
  g.strength = s1;
  g.coherence = (s1 - s2) / (s1 + s2);
  return g;
}

FeatureVector assemble_feature(const GradientFeature& g, double pstValue, const FeatureWeights& w) {
  if (w.strength < 0.0 || w.coherence < 0.0 || w.angle < 0.0 || w.pst < 0.0) {
    throw ArgumentError("feature weights must be non-negative");
  }
  const bool degenerate = g.strength == 0.0;
  const double c = degenerate ? 0.0 : std::cos(2.0 * g.angle);
  const double s = degenerate ? 0.0 : std::sin(2.0 * g.angle);
  return {g.strength * w.strength, g.coherence * w.coherence, c * w.angle, s * w.angle,
          (pstValue / std::numbers::pi) * w.pst};
}

}  // namespace phsar
