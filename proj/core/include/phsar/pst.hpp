#pragma once

#include <span>
#include <vector>

#include "phsar/image.hpp"

namespace phsar {

// Phase Stretch Transform parameters. None of them has a canonical value; the
// defaults are the ones used throughout this project.
struct PstParams {
  double strength = 0.5;  // peak phase in radians, reached at the highest radial frequency
  double warp = 12.5;     // frequency warp of the arctan/log profile
  double lpSigma = 0.3;   // Gaussian localisation width, fraction of the maximum radius

  friend bool operator==(const PstParams&, const PstParams&) = default;
};

// Phase and low-pass gain sampled on an FFT-ordered frequency grid
// (u, v in [-0.5, 0.5) cycles/pixel).
class PstKernel {
 public:
  PstKernel() = default;

  int width() const { return width_; }
  int height() const { return height_; }
  const PstParams& params() const { return params_; }

  double phase(int u, int v) const { return phase_[index(u, v)]; }
  double lowpass(int u, int v) const { return lowpass_[index(u, v)]; }
  std::span<const double> phase() const { return phase_; }
  std::span<const double> lowpass() const { return lowpass_; }

  friend PstKernel build_kernel(int, int, const PstParams&);

 private:
  std::size_t index(int u, int v) const { return static_cast<std::size_t>(v) * width_ + u; }

  int width_ = 0;
  int height_ = 0;
  PstParams params_;
  std::vector<double> phase_;
  std::vector<double> lowpass_;
};

// Output of apply_pst: per-pixel phase angle in [-pi, pi].
struct PhaseImage {
  int width = 0;
  int height = 0;
  std::vector<double> phase;

  double at(int x, int y) const { return phase[static_cast<std::size_t>(y) * width + x]; }
};

// Signed FFT frequency of bin k on an n-point grid, in cycles/sample.
double fft_frequency(int k, int n);

// Radial phase profile before normalisation: W r atan(W r) - ln(1 + (W r)^2) / 2.
double pst_profile(double r, double warp);

// Builds the kernel for a gridWidth x gridHeight image. Throws ArgumentError
// for empty grids, negative strength, or non-positive warp / lpSigma.
PstKernel build_kernel(int gridWidth, int gridHeight, const PstParams& params);

// Filters the image spectrum with lowpass * exp(-j phase) and returns the
// per-pixel phase of the inverse transform.
PhaseImage apply_pst(const GrayImage& img, const PstKernel& kernel);

// Mean absolute phase over a patch-sized window; the scalar PST feature.
double pst_feature(std::span<const double> phasePatch);

}  // namespace phsar
