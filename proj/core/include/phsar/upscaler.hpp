#pragma once

#include <cstdint>
#include <vector>

#include "phsar/image.hpp"
#include "phsar/model.hpp"

namespace phsar {

struct UpscaleOptions {
  unsigned threads = 0;
};

// Enlarges `lr` by the model's scale: bicubic base, per-pixel feature,
// nearest anchor, then the bucket filter's dot product with the base patch.
// Output is clamped to [0, 1]. Throws ArgumentError if either LR dimension is
// below the model's patch size.
GrayImage upscale(const GrayImage& lr, const Model& model, const UpscaleOptions& opts = {});

// Same pipeline with the PST descriptor removed. Requires a model trained with
// a zero PST weight when dropPst is set (ArgumentError otherwise).
GrayImage upscale_ablated(const GrayImage& lr, const Model& model, bool dropPst, const UpscaleOptions& opts = {});

// Upscale that also reports the bucket chosen for every output pixel and the
// pre-clamp filter response.
struct UpscaleTrace {
  GrayImage output;
  GrayImage unclamped;
  std::vector<std::uint32_t> buckets;  // row-major over the output grid
};
UpscaleTrace upscale_traced(const GrayImage& lr, const Model& model, const UpscaleOptions& opts = {});

// Applies the filters with a fixed bucket map (from upscale_traced) and
// returns the unclamped response. Linear in `lr` as long as the bicubic base
// stays inside [0, 1].
GrayImage replay_with_buckets(const GrayImage& lr, const Model& model, const std::vector<std::uint32_t>& buckets,
                              const UpscaleOptions& opts = {});

}  // namespace phsar
