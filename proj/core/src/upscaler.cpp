#include "phsar/upscaler.hpp"

#include <algorithm>
#include <string>

#include "phsar/error.hpp"
#include "phsar/learner.hpp"
#include "phsar/parallel.hpp"

namespace phsar {

namespace {

void check_input(const GrayImage& lr, const Model& model) {
  const int p = model.config.patchSize;
  if (lr.width() < p || lr.height() < p) {
    throw ArgumentError("input " + std::to_string(lr.width()) + "x" + std::to_string(lr.height()) +
                        " is too small; minimum is " + std::to_string(p) + "x" + std::to_string(p));
  }
}

inline double dot(const std::vector<double>& a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// Rows are independent; each worker owns its scratch buffers and writes
// disjoint rows of the outputs.
UpscaleTrace run(const GrayImage& lr, const Model& model, const UpscaleOptions& opts, bool wantBuckets) {
  check_input(lr, model);
  const TrainConfig& cfg = model.config;
  const GrayImage base = cheap_upscale(lr, cfg.scale);
  const PatchFeaturizer featurizer(base, cfg);
  const int w = base.width();
  const int h = base.height();

  UpscaleTrace trace;
  trace.output = GrayImage(w, h);
  trace.unclamped = GrayImage(w, h);
  if (wantBuckets) trace.buckets.resize(static_cast<std::size_t>(w) * h);
  parallel_for(static_cast<std::size_t>(h), opts.threads, [&](std::size_t row) {
    const int y = static_cast<int>(row);
    std::vector<double> patch;
    std::vector<double> scratch;
    for (int x = 0; x < w; ++x) {
      const FeatureVector f = featurizer.feature_at(x, y, patch, scratch);
      const std::size_t bucket = bucket_index(nearest_centroid(f, model.codebook), x, y, cfg);
      const double v = dot(patch, model.filter(bucket));
      trace.unclamped.at(x, y) = v;
      trace.output.at(x, y) = std::clamp(v, 0.0, 1.0);
      if (wantBuckets) trace.buckets[row * static_cast<std::size_t>(w) + x] = static_cast<std::uint32_t>(bucket);
    }
  });
  return trace;
}

}  // namespace

GrayImage upscale(const GrayImage& lr, const Model& model, const UpscaleOptions& opts) {
  return run(lr, model, opts, false).output;
}

GrayImage upscale_ablated(const GrayImage& lr, const Model& model, bool dropPst, const UpscaleOptions& opts) {
  if (dropPst && model.config.weights.pst != 0.0) {
    throw ArgumentError("PST ablation requires a model trained with PST weight 0 (model has " +
                        std::to_string(model.config.weights.pst) + ")");
  }
  return upscale(lr, model, opts);
}

UpscaleTrace upscale_traced(const GrayImage& lr, const Model& model, const UpscaleOptions& opts) {
  return run(lr, model, opts, true);
}

GrayImage replay_with_buckets(const GrayImage& lr, const Model& model, const std::vector<std::uint32_t>& buckets,
                              const UpscaleOptions& opts) {
  check_input(lr, model);
  const GrayImage base = cheap_upscale(lr, model.config.scale);
  const int w = base.width();
  const int h = base.height();
  if (buckets.size() != static_cast<std::size_t>(w) * h) throw ArgumentError("bucket map does not match output size");
  GrayImage out(w, h);
  const int n = model.config.patchSize;
  parallel_for(static_cast<std::size_t>(h), opts.threads, [&](std::size_t row) {
    const int y = static_cast<int>(row);
    std::vector<double> patch;
    for (int x = 0; x < w; ++x) {
      extract_window(base.samples(), w, h, x, y, n, patch);
      const std::uint32_t b = buckets[row * static_cast<std::size_t>(w) + x];
      if (b >= model.bucket_count()) throw ArgumentError("bucket index out of range in bucket map");
      out.at(x, y) = dot(patch, model.filter(b));
    }
  });
  return out;
}

}  // namespace phsar
