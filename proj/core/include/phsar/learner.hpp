#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phsar/features.hpp"
#include "phsar/image.hpp"
#include "phsar/model.hpp"
#include "phsar/pst.hpp"

namespace phsar {

// Crops the right/bottom edges so both dimensions are multiples of `scale`.
GrayImage trim_to_scale(const GrayImage& img, int scale);

// Training/evaluation degradation: antialiased bicubic shrink by `scale`.
GrayImage degrade(const GrayImage& hr, int scale);

// Bicubic enlargement of the LR grid; the grid the filters operate on.
GrayImage cheap_upscale(const GrayImage& lr, int scale);

// Computes clustering features for pixels of a base image. The PST phase image
// is only computed when the PST weight is non-zero. Not thread-safe per
// instance only because of the scratch buffer passed in by the caller.
class PatchFeaturizer {
 public:
  PatchFeaturizer(const GrayImage& base, const TrainConfig& cfg);

  // Fills `patch` with the base window around (x, y) and returns the feature.
  FeatureVector feature_at(int x, int y, std::vector<double>& patch, std::vector<double>& scratch) const;

  const GrayImage& base() const { return base_; }
  const std::optional<PhaseImage>& phase() const { return phase_; }

 private:
  const GrayImage& base_;
  const TrainConfig& cfg_;
  std::optional<PhaseImage> phase_;
};

// One training pair as produced by harvest_pairs. `patch` is only valid for
// the duration of the sink call.
struct TrainingPair {
  int x = 0;
  int y = 0;
  FeatureVector feature{};
  std::optional<std::size_t> bucket;  // set when a codebook was supplied
  std::span<const double> patch;
  double target = 0.0;
};

struct HarvestResult {
  std::size_t pairs = 0;
  bool skipped = false;
  std::string warning;
};

// Degrades `hr` (after trimming to a multiple of the scale), cheap-upscales it
// back and emits one pair per HR pixel at least patchSize/2 from the border.
// Without a codebook (first training pass) only features are meaningful.
// Images too small to hold one patch at LR scale are skipped, not fatal.
HarvestResult harvest_pairs(const GrayImage& hr, const TrainConfig& cfg, const Codebook* codebook,
                            const std::function<void(const TrainingPair&)>& sink);

// Per-bucket normal-equation statistics: gram = sum a a^T (upper triangle,
// packed row-wise), cross = sum a b, count = n.
class TrainAccumulator {
 public:
  TrainAccumulator() = default;
  TrainAccumulator(std::size_t buckets, std::size_t taps);

  std::size_t buckets() const { return counts_.size(); }
  std::size_t taps() const { return taps_; }

  // Throws std::out_of_range for a bucket past the end and ArgumentError for a
  // patch of the wrong length.
  void add(std::size_t bucket, std::span<const double> a, double b);
  // Component-wise sum; shapes must match.
  void merge(const TrainAccumulator& other);

  double gram(std::size_t bucket, std::size_t i, std::size_t j) const;
  std::span<const double> cross(std::size_t bucket) const {
    return std::span<const double>(cross_).subspan(bucket * taps_, taps_);
  }
  std::uint64_t count(std::size_t bucket) const { return counts_[bucket]; }
  std::span<const std::uint64_t> counts() const { return counts_; }

  // Dense symmetric copy of one bucket's Gram matrix.
  std::vector<double> dense_gram(std::size_t bucket) const;

  friend bool operator==(const TrainAccumulator&, const TrainAccumulator&) = default;

 private:
  std::size_t packed_size() const { return taps_ * (taps_ + 1) / 2; }

  std::size_t taps_ = 0;
  std::vector<double> gram_;
  std::vector<double> cross_;
  std::vector<std::uint64_t> counts_;
};

TrainAccumulator merged(TrainAccumulator a, const TrainAccumulator& b);

struct FilterSolution {
  std::vector<double> filters;  // buckets x taps
  std::vector<std::uint8_t> fallback;
};

// Solves (gram + ridge * trace/d * I) h = cross per bucket by Cholesky. Buckets
// with fewer than minSamples samples, or whose factorisation hits a pivot
// below 1e-12 of the largest diagonal entry, get the delta filter.
FilterSolution solve_filters(const TrainAccumulator& acc, double ridgeLambda, std::int64_t minSamples,
                             unsigned threads = 0);
FilterSolution solve_filters(const TrainAccumulator& acc, const TrainConfig& cfg, unsigned threads = 0);

// Solves the SPD system in place. Returns false (leaving `rhs` unspecified)
// if a pivot falls below relPivot times the largest diagonal entry.
bool cholesky_solve(std::vector<double>& matrix, std::vector<double>& rhs, std::size_t n, double relPivot = 1e-12);

struct TrainStats {
  std::size_t images = 0;
  std::size_t skippedImages = 0;
  std::size_t pairs = 0;
  std::size_t clusteredFeatures = 0;
  int kmeansIterations = 0;
  std::size_t flatFidelityReplacements = 0;
  std::vector<std::string> warnings;
};

// Two-pass training: features -> k-means codebook, then per-bucket
// accumulation and filter solve. Throws IoError/FormatError for unreadable
// inputs and TrainingError when no training pairs exist.
Model train(const std::vector<std::filesystem::path>& hrPaths, const TrainConfig& cfg, unsigned threads = 0,
            TrainStats* stats = nullptr);
Model train_images(const std::vector<GrayImage>& hrImages, const TrainConfig& cfg, unsigned threads = 0,
                   TrainStats* stats = nullptr);

// Lists .png/.pgm files in a directory, sorted by file name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace phsar
