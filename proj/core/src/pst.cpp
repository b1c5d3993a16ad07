#include "phsar/pst.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <string>

#include "phsar/error.hpp"

namespace phsar {

namespace {

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;

  fftw_complex* data;
};

struct FftwPlan {
  explicit FftwPlan(fftw_plan p) : plan(p) {}
  ~FftwPlan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;

  fftw_plan plan;
};

FftwPlan make_plan(int width, int height, fftw_complex* buf, int sign) {
  std::lock_guard lock(planner_mutex());
  return FftwPlan(fftw_plan_dft_2d(height, width, buf, buf, sign, FFTW_ESTIMATE));
}

}  // namespace

double fft_frequency(int k, int n) {
  const int signedK = (2 * k < n) ? k : k - n;
  return static_cast<double>(signedK) / n;
}

double pst_profile(double r, double warp) {
  const double wr = warp * r;
  return wr * std::atan(wr) - 0.5 * std::log1p(wr * wr);
}

PstKernel build_kernel(int gridWidth, int gridHeight, const PstParams& params) {
  if (gridWidth < 1 || gridHeight < 1) {
    throw ArgumentError("PST grid must be at least 1x1, got " + std::to_string(gridWidth) + "x" +
                        std::to_string(gridHeight));
  }
  if (!(params.strength >= 0.0) || !std::isfinite(params.strength)) {
    throw ArgumentError("PST strength must be finite and >= 0");
  }
  if (!(params.warp > 0.0) || !std::isfinite(params.warp)) throw ArgumentError("PST warp must be finite and > 0");
  if (!(params.lpSigma > 0.0) || !std::isfinite(params.lpSigma)) {
    throw ArgumentError("PST low-pass sigma must be finite and > 0");
  }

  PstKernel k;
  k.width_ = gridWidth;
  k.height_ = gridHeight;
  k.params_ = params;
  const std::size_t n = static_cast<std::size_t>(gridWidth) * gridHeight;
  std::vector<double> radius(n);
  double rmax = 0.0;
  for (int v = 0; v < gridHeight; ++v) {
    const double fv = fft_frequency(v, gridHeight);
    for (int u = 0; u < gridWidth; ++u) {
      const double fu = fft_frequency(u, gridWidth);
      const double r = std::sqrt(fu * fu + fv * fv);
      radius[static_cast<std::size_t>(v) * gridWidth + u] = r;
      rmax = std::max(rmax, r);
    }
  }

  k.phase_.assign(n, 0.0);
  k.lowpass_.assign(n, 1.0);
  if (rmax == 0.0) return k;  // 1x1 grid: DC only
  const double gmax = pst_profile(rmax, params.warp);
  const double sigma = params.lpSigma * rmax;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = radius[i];
    // r == rmax is pinned so the peak phase equals the strength exactly.
    k.phase_[i] = r == rmax ? params.strength : params.strength * pst_profile(r, params.warp) / gmax;
    k.lowpass_[i] = std::exp(-(r * r) / (2.0 * sigma * sigma));
  }
  return k;
}

PhaseImage apply_pst(const GrayImage& img, const PstKernel& kernel) {
  if (img.width() != kernel.width() || img.height() != kernel.height()) {
    throw ArgumentError("PST kernel grid " + std::to_string(kernel.width()) + "x" + std::to_string(kernel.height()) +
                        " does not match image " + std::to_string(img.width()) + "x" +
                        std::to_string(img.height()));
  }
  const int w = img.width();
  const int h = img.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  FftwBuffer buf(n);
  const FftwPlan forward = make_plan(w, h, buf.data, FFTW_FORWARD);
  const FftwPlan inverse = make_plan(w, h, buf.data, FFTW_BACKWARD);

  const auto src = img.samples();
  for (std::size_t i = 0; i < n; ++i) {
    buf.data[i][0] = src[i];
    buf.data[i][1] = 0.0;
  }
  fftw_execute(forward.plan);
  const auto phase = kernel.phase();
  const auto lowpass = kernel.lowpass();
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> gain = std::polar(lowpass[i], -phase[i]);
    const std::complex<double> z = std::complex<double>(buf.data[i][0], buf.data[i][1]) * gain;
    buf.data[i][0] = z.real();
    buf.data[i][1] = z.imag();
  }
  fftw_execute(inverse.plan);

  PhaseImage out;
  out.width = w;
  out.height = h;
  out.phase.resize(n);
  const double norm = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out.phase[i] = std::atan2(buf.data[i][1] * norm, buf.data[i][0] * norm);
  return out;
}

double pst_feature(std::span<const double> phasePatch) {
  if (phasePatch.empty()) throw ArgumentError("PST feature of an empty patch");
  double sum = 0.0;
  for (double v : phasePatch) sum += std::abs(v);
  return sum / static_cast<double>(phasePatch.size());
}

}  // namespace phsar
