#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "phsar/codebook.hpp"
#include "phsar/features.hpp"
#include "phsar/learner.hpp"
#include "phsar/pst.hpp"
#include "phsar/upscaler.hpp"

namespace {

phsar::GrayImage texture(int w, int h) {
  phsar::GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = 0.5 + 0.25 * std::sin(0.3 * x + 0.1 * y) * std::cos(0.17 * y - 0.05 * x);
  return img;
}

phsar::Model bench_model(int scale, int patch, std::size_t k) {
  phsar::TrainConfig cfg;
  cfg.scale = scale;
  cfg.patchSize = patch;
  cfg.clusters = k;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  phsar::Codebook cb;
  cb.centroids.resize(k);
  for (auto& c : cb.centroids)
    for (double& v : c) v = u(rng);
  phsar::Model m = phsar::make_delta_model(cfg, cb);
  for (double& v : m.filters) v += 0.01 * (u(rng) - 0.5);
  return m;
}

void BM_ResizeBicubic(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const phsar::GrayImage img = texture(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(phsar::resize_bicubic(img, 2 * n, 2 * n, false));
  state.SetItemsProcessed(state.iterations() * 4 * n * n);
}
BENCHMARK(BM_ResizeBicubic)->Arg(128)->Arg(512);

void BM_ApplyPst(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const phsar::GrayImage img = texture(n, n);
  const phsar::PstKernel kernel = phsar::build_kernel(n, n, {});
  for (auto _ : state) benchmark::DoNotOptimize(phsar::apply_pst(img, kernel));
}
BENCHMARK(BM_ApplyPst)->Arg(11)->Arg(256);

void BM_GradientFeatures(benchmark::State& state) {
  const phsar::GrayImage img = texture(11, 11);
  for (auto _ : state) benchmark::DoNotOptimize(phsar::gradient_features(img.samples(), 11));
}
BENCHMARK(BM_GradientFeatures);

void BM_NearestCentroid(benchmark::State& state) {
  const phsar::Model m = bench_model(2, 11, static_cast<std::size_t>(state.range(0)));
  phsar::FeatureVector f{0.3, 0.2, 0.1, -0.4, 0.05};
  for (auto _ : state) benchmark::DoNotOptimize(phsar::nearest_centroid(f, m.codebook));
}
BENCHMARK(BM_NearestCentroid)->Arg(64)->Arg(512);

void BM_KMeans(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<phsar::FeatureVector> pts(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pts)
    for (double& v : p) v = n(rng);
  phsar::KMeansOptions opts;
  opts.k = 64;
  opts.maxIter = 20;
  opts.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(phsar::kmeans_fit(pts, opts));
}
BENCHMARK(BM_KMeans)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_Upscale(benchmark::State& state) {
  const phsar::Model m = bench_model(2, 11, 64);
  const phsar::GrayImage lr = texture(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(phsar::upscale(lr, m, {1}));
}
BENCHMARK(BM_Upscale)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
