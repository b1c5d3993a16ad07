#pragma once

#include <array>
#include <span>

namespace phsar {

// Dominant gradient orientation and anisotropy of a patch, from the
// eigen-structure of its (unweighted) structure tensor.
struct GradientFeature {
  double angle = 0.0;      // [0, pi)
  double strength = 0.0;   // sqrt(lambda1)
  double coherence = 0.0;  // (sqrt(l1) - sqrt(l2)) / (sqrt(l1) + sqrt(l2)), in [0, 1]
};

// The four per-patch descriptors used for clustering.
struct PatchFeature {
  GradientFeature gradient;
  double pst = 0.0;  // [0, pi]
};

// Per-descriptor scaling applied when embedding; pst = 0 removes the PST
// descriptor from clustering entirely.
struct FeatureWeights {
  double strength = 1.0;
  double coherence = 1.0;
  double angle = 1.0;
  double pst = 1.0;

  friend bool operator==(const FeatureWeights&, const FeatureWeights&) = default;
};

// Clustering embedding:
//   [strength*wS, coherence*wC, cos(2 angle)*wA, sin(2 angle)*wA, (pst/pi)*wP]
// The doubled angle makes theta and theta + pi coincide.
inline constexpr std::size_t kFeatureDims = 5;
using FeatureVector = std::array<double, kFeatureDims>;

// Structure tensor of a square row-major patch (side patchSize >= 3).
// Central differences inside, one-sided differences on the patch border.
struct StructureTensor {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;
};
StructureTensor structure_tensor(std::span<const double> patch, int patchSize);

GradientFeature gradient_features(std::span<const double> patch, int patchSize);

// Throws ArgumentError on negative weights.
FeatureVector assemble_feature(const GradientFeature& g, double pstValue, const FeatureWeights& weights);

}  // namespace phsar
