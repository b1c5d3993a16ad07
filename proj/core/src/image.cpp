#include "phsar/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "phsar/error.hpp"

namespace phsar {

GrayImage::GrayImage(int width, int height, double fill) : GrayImage(width, height, std::vector<double>()) {
  samples_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  if (width < 1 || height < 1) {
    throw ArgumentError("image dimensions must be >= 1, got " + std::to_string(width) + "x" +
                        std::to_string(height));
  }
  if (!samples_.empty() && samples_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ArgumentError("sample count does not match image dimensions");
  }
}

GrayImage GrayImage::crop(int x0, int y0, int w, int h) const {
  if (x0 < 0 || y0 < 0 || w < 1 || h < 1 || x0 + w > width_ || y0 + h > height_) {
    throw ArgumentError("crop rectangle outside image");
  }
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    const auto src = row(y0 + y).subspan(static_cast<std::size_t>(x0), static_cast<std::size_t>(w));
    std::copy(src.begin(), src.end(), out.samples().begin() + static_cast<std::ptrdiff_t>(y) * w);
  }
  return out;
}

GrayImage GrayImage::clamped() const {
  GrayImage out = *this;
  for (double& v : out.samples_) v = std::clamp(v, 0.0, 1.0);
  return out;
}

double cubic_kernel(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t < 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

namespace {

// Resampling taps for one axis: for each destination index, a run of
// (clamped source index, weight) pairs plus the index of the dominant tap.
struct AxisTaps {
  std::vector<std::size_t> offset;  // into index/weight, size dst+1
  std::vector<int> index;
  std::vector<double> weight;
  std::vector<int> reference;
};

AxisTaps build_taps(int src, int dst, bool antialias) {
  AxisTaps taps;
  taps.offset.reserve(static_cast<std::size_t>(dst) + 1);
  taps.offset.push_back(0);
  const double scale = static_cast<double>(src) / dst;
  const double stretch = (antialias && scale > 1.0) ? scale : 1.0;
  const double radius = 2.0 * stretch;
  for (int d = 0; d < dst; ++d) {
    const double center = (d + 0.5) * scale - 0.5;
    const int lo = static_cast<int>(std::ceil(center - radius));
    const int hi = static_cast<int>(std::floor(center + radius));
    const std::size_t begin = taps.weight.size();
    double sum = 0.0;
    double best = -1.0;
    int ref = std::clamp(static_cast<int>(std::lround(center)), 0, src - 1);
    for (int i = lo; i <= hi; ++i) {
      const double w = cubic_kernel((i - center) / stretch);
      if (w == 0.0) continue;
      const int clamped = std::clamp(i, 0, src - 1);
      taps.index.push_back(clamped);
      taps.weight.push_back(w);
      sum += w;
      if (w > best) {
        best = w;
        ref = clamped;
      }
    }
    for (std::size_t k = begin; k < taps.weight.size(); ++k) taps.weight[k] /= sum;
    taps.offset.push_back(taps.weight.size());
    taps.reference.push_back(ref);
  }
  return taps;
}

// Weighted sum written relative to the dominant tap, so any constant run of
// inputs reproduces that constant bit-exactly.
inline double apply_taps(const AxisTaps& taps, int d, const double* base, std::size_t stride) {
  const double ref = base[static_cast<std::size_t>(taps.reference[d]) * stride];
  double acc = 0.0;
  for (std::size_t k = taps.offset[d]; k < taps.offset[d + 1]; ++k) {
    acc += taps.weight[k] * (base[static_cast<std::size_t>(taps.index[k]) * stride] - ref);
  }
  return ref + acc;
}

}  // namespace

GrayImage resize_bicubic(const GrayImage& img, int outWidth, int outHeight, bool antialias) {
  if (outWidth < 1 || outHeight < 1) {
    throw ArgumentError("resize target must be at least 1x1, got " + std::to_string(outWidth) + "x" +
                        std::to_string(outHeight));
  }
  if (img.empty()) throw ArgumentError("cannot resize an empty image");
  const int srcW = img.width();
  const int srcH = img.height();
  const AxisTaps xTaps = build_taps(srcW, outWidth, antialias);
  const AxisTaps yTaps = build_taps(srcH, outHeight, antialias);

  // Horizontal pass into an unclamped intermediate, then vertical.
  std::vector<double> mid(static_cast<std::size_t>(outWidth) * srcH);
  const double* src = img.samples().data();
  for (int y = 0; y < srcH; ++y) {
    const double* rowPtr = src + static_cast<std::size_t>(y) * srcW;
    double* outRow = mid.data() + static_cast<std::size_t>(y) * outWidth;
    for (int x = 0; x < outWidth; ++x) outRow[x] = apply_taps(xTaps, x, rowPtr, 1);
  }
  GrayImage out(outWidth, outHeight);
  auto dst = out.samples();
  for (int y = 0; y < outHeight; ++y) {
    for (int x = 0; x < outWidth; ++x) {
      const double v = apply_taps(yTaps, y, mid.data() + x, static_cast<std::size_t>(outWidth));
      dst[static_cast<std::size_t>(y) * outWidth + x] = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

void extract_window(std::span<const double> plane, int width, int height, int cx, int cy, int patchSize,
                    std::vector<double>& out) {
  const int r = patchSize / 2;
  out.resize(static_cast<std::size_t>(patchSize) * patchSize);
  double* o = out.data();
  if (cx - r >= 0 && cy - r >= 0 && cx + r < width && cy + r < height) {
    for (int dy = -r; dy <= r; ++dy) {
      const double* src = plane.data() + static_cast<std::size_t>(cy + dy) * width + (cx - r);
      std::copy(src, src + patchSize, o);
      o += patchSize;
    }
    return;
  }
  for (int dy = -r; dy <= r; ++dy) {
    const int yy = std::clamp(cy + dy, 0, height - 1);
    const double* src = plane.data() + static_cast<std::size_t>(yy) * width;
    for (int dx = -r; dx <= r; ++dx) *o++ = src[std::clamp(cx + dx, 0, width - 1)];
  }
}

Patch extract_patch(const GrayImage& img, int cx, int cy, int patchSize) {
  if (patchSize < 3 || patchSize % 2 == 0) {
    throw ArgumentError("patch size must be an odd integer >= 3, got " + std::to_string(patchSize));
  }
  if (cx < 0 || cy < 0 || cx >= img.width() || cy >= img.height()) {
    throw ArgumentError("patch centre (" + std::to_string(cx) + ", " + std::to_string(cy) + ") outside image");
  }
  Patch p;
  p.patchSize = patchSize;
  extract_window(img.samples(), img.width(), img.height(), cx, cy, patchSize, p.values);
  return p;
}

}  // namespace phsar
