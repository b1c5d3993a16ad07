#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace phsar {

// Single-channel image with real-valued samples, nominally in [0, 1].
// Samples are stored row-major; intermediate results may leave [0, 1] and are
// clamped before they are written to disk.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> samples);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  double at(int x, int y) const { return samples_[index(x, y)]; }
  double& at(int x, int y) { return samples_[index(x, y)]; }

  std::span<const double> samples() const { return samples_; }
  std::span<double> samples() { return samples_; }
  std::span<const double> row(int y) const {
    return std::span<const double>(samples_).subspan(static_cast<std::size_t>(y) * width_, width_);
  }

  // Copy of the rectangle [x0, x0+w) x [y0, y0+h); must lie inside the image.
  GrayImage crop(int x0, int y0, int w, int h) const;

  // Copy with every sample clamped to [0, 1].
  GrayImage clamped() const;

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> samples_;
};

// Square window of patchSize^2 samples centred on a pixel, row-major, with the
// centre at index (patchSize^2 - 1) / 2.
struct Patch {
  int patchSize = 0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double center() const { return values[values.size() / 2]; }
};

// Reads an 8/16-bit grayscale or RGB PNG, or a binary PGM (P5). RGB is reduced
// to Rec.601 luma. Throws IoError or FormatError.
GrayImage load_image(const std::filesystem::path& path);

// Writes an 8-bit grayscale PNG or PGM, chosen by extension (.png / .pgm).
// Samples are clamped to [0, 1] and stored as round(v * 255).
void save_image(const GrayImage& img, const std::filesystem::path& path);

// Byte the saver stores for a sample (clamp, then round half up).
unsigned char quantize_sample(double v);

// Catmull-Rom (a = -0.5) bicubic resampling with half-pixel centre alignment
// and clamped source coordinates. With `antialias` set, shrinking directions
// widen the kernel by the inverse scale factor. Output is clamped to [0, 1].
GrayImage resize_bicubic(const GrayImage& img, int outWidth, int outHeight, bool antialias);

// Catmull-Rom kernel value at distance t (a = -0.5).
double cubic_kernel(double t);

// Window extraction with replicate padding. patchSize must be odd.
Patch extract_patch(const GrayImage& img, int cx, int cy, int patchSize);

// Same as extract_patch but writes into `out` (resized to patchSize^2) from a
// raw row-major plane; used on the hot paths to avoid allocation.
void extract_window(std::span<const double> plane, int width, int height, int cx, int cy,
                    int patchSize, std::vector<double>& out);

}  // namespace phsar
