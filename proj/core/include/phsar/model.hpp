#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "phsar/codebook.hpp"
#include "phsar/features.hpp"
#include "phsar/pst.hpp"

namespace phsar {

// Hyperparameters for training; echoed verbatim into every model.
struct TrainConfig {
  int scale = 2;                 // integer upscale factor, 2..4
  int patchSize = 11;            // odd, >= 3
  std::size_t clusters = 64;     // K
  double ridgeLambda = 1e-6;     // relative Tikhonov weight (scaled by trace/d)
  std::int64_t minSamples = -1;  // < 0 selects 4 * patchSize^2
  PstParams pst;
  FeatureWeights weights;
  std::uint64_t seed = 0;
  bool phaseStratify = true;
  int kmeansMaxIter = 100;
  double kmeansTol = 1e-6;
  std::size_t featureCap = 2'000'000;

  int taps() const { return patchSize * patchSize; }
  std::size_t bucket_count() const {
    return phaseStratify ? clusters * static_cast<std::size_t>(scale) * static_cast<std::size_t>(scale) : clusters;
  }
  std::int64_t effective_min_samples() const {
    return minSamples >= 0 ? minSamples : 4 * static_cast<std::int64_t>(taps());
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Throws ArgumentError naming the offending field.
void validate(const TrainConfig& cfg);

// Bucket owning an output pixel: cluster index, refined by the pixel's
// position on the upscaling lattice when phase stratification is on.
inline std::size_t bucket_index(std::size_t cluster, int x, int y, const TrainConfig& cfg) {
  if (!cfg.phaseStratify) return cluster;
  const auto s = static_cast<std::size_t>(cfg.scale);
  const std::size_t phaseClass = static_cast<std::size_t>(y % cfg.scale) * s + static_cast<std::size_t>(x % cfg.scale);
  return cluster * s * s + phaseClass;
}

// Learned filter bank plus everything needed to reproduce inference.
struct Model {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::uint32_t formatVersion = kFormatVersion;
  TrainConfig config;
  Codebook codebook;
  std::vector<double> filters;         // bucket_count() x taps(), row-major
  std::vector<std::uint64_t> counts;   // training samples per bucket
  std::vector<std::uint8_t> fallback;  // 1 where the bucket holds the delta filter

  std::size_t bucket_count() const { return counts.size(); }
  std::size_t taps() const { return static_cast<std::size_t>(config.taps()); }
  std::span<const double> filter(std::size_t bucket) const {
    return std::span<const double>(filters).subspan(bucket * taps(), taps());
  }
  std::span<double> filter(std::size_t bucket) {
    return std::span<double>(filters).subspan(bucket * taps(), taps());
  }
  std::size_t fallback_count() const;

  friend bool operator==(const Model&, const Model&) = default;
};

// Writes the discrete delta (1 at the centre tap) into `filter`.
void set_delta(std::span<double> filter);
bool is_delta(std::span<const double> filter);

// Model whose every filter is the delta; upscaling with it reproduces the
// bicubic base image. The codebook must hold cfg.clusters centroids.
Model make_delta_model(const TrainConfig& cfg, Codebook codebook);

// Any bucket reachable by the all-zero feature vector (flat patches) must hold
// the delta or a filter whose taps sum to 1 within 1e-3; otherwise it is
// replaced by the delta and flagged. Returns the number of replaced buckets.
std::size_t enforce_flat_fidelity(Model& model);

// Binary .phsar container: "PHSAR\0", u32 version, u32 header length, JSON
// header, K x 5 centroids, bucketCount x taps filters; all little-endian.
std::vector<std::uint8_t> serialize_model(const Model& model);
Model parse_model(std::span<const std::uint8_t> bytes, const std::string& origin = "<memory>");
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

// 64-bit FNV-1a of the serialized model, as 16 hex digits.
std::string model_digest(const Model& model);

}  // namespace phsar
