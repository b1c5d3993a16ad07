#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "phsar/features.hpp"

namespace phsar {

// xorshift64* generator seeded through splitmix64, so every 64-bit seed
// (including 0) gives a usable non-zero state.
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed);

  std::uint64_t next();
  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  // Uniform integer in [0, n); n > 0.
  std::size_t below(std::size_t n);

 private:
  std::uint64_t state_;
};

// K anchor points in feature space.
struct Codebook {
  std::uint64_t seed = 0;
  std::vector<FeatureVector> centroids;

  std::size_t k() const { return centroids.size(); }
  friend bool operator==(const Codebook&, const Codebook&) = default;
};

struct KMeansOptions {
  std::size_t k = 64;
  std::uint64_t seed = 0;
  int maxIter = 100;
  double tol = 1e-6;
  unsigned threads = 0;
};

// Diagnostics for one fit. sseHistory[i] is the within-cluster SSE right
// after the i-th assignment step.
struct KMeansTrace {
  int iterations = 0;
  bool converged = false;
  std::vector<double> sseHistory;
};

inline double squared_distance(const FeatureVector& a, const FeatureVector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < kFeatureDims; ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

// Index of the centroid with the smallest squared Euclidean distance; ties go
// to the lowest index. This linear scan is the hot path of inference.
std::size_t nearest_centroid(const FeatureVector& f, std::span<const FeatureVector> centroids);
inline std::size_t nearest_centroid(const FeatureVector& f, const Codebook& cb) {
  return nearest_centroid(f, std::span<const FeatureVector>(cb.centroids));
}

// Seeded k-means++ followed by Lloyd iterations. Empty clusters are reseeded
// with the point farthest from its assigned centroid. The result does not
// depend on opts.threads. Throws ArgumentError when the preconditions fail
// (empty input, k outside [1, |features|], maxIter < 1, tol < 0).
Codebook kmeans_fit(std::span<const FeatureVector> features, const KMeansOptions& opts,
                    KMeansTrace* trace = nullptr);

// Deterministic stride subsample down to at most `cap` points.
std::vector<FeatureVector> stride_subsample(std::span<const FeatureVector> features, std::size_t cap);

}  // namespace phsar
