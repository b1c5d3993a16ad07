#include "phsar/learner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

#include "phsar/codebook.hpp"
#include "phsar/error.hpp"
#include "phsar/parallel.hpp"

namespace phsar {

GrayImage trim_to_scale(const GrayImage& img, int scale) {
  if (scale < 1) throw ArgumentError("scale must be >= 1");
  const int w = img.width() - img.width() % scale;
  const int h = img.height() - img.height() % scale;
  if (w < 1 || h < 1) throw ArgumentError("image smaller than the scale factor");
  if (w == img.width() && h == img.height()) return img;
  return img.crop(0, 0, w, h);
}

GrayImage degrade(const GrayImage& hr, int scale) {
  return resize_bicubic(hr, hr.width() / scale, hr.height() / scale, true);
}

GrayImage cheap_upscale(const GrayImage& lr, int scale) {
  return resize_bicubic(lr, lr.width() * scale, lr.height() * scale, false);
}

PatchFeaturizer::PatchFeaturizer(const GrayImage& base, const TrainConfig& cfg) : base_(base), cfg_(cfg) {
  if (cfg.weights.pst != 0.0) phase_ = apply_pst(base, build_kernel(base.width(), base.height(), cfg.pst));
}

FeatureVector PatchFeaturizer::feature_at(int x, int y, std::vector<double>& patch,
                                          std::vector<double>& scratch) const {
  const int n = cfg_.patchSize;
  extract_window(base_.samples(), base_.width(), base_.height(), x, y, n, patch);
  const GradientFeature g = gradient_features(patch, n);
  double pst = 0.0;
  if (phase_) {
    extract_window(phase_->phase, phase_->width, phase_->height, x, y, n, scratch);
    pst = pst_feature(scratch);
  }
  return assemble_feature(g, pst, cfg_.weights);
}

HarvestResult harvest_pairs(const GrayImage& hrIn, const TrainConfig& cfg, const Codebook* codebook,
                            const std::function<void(const TrainingPair&)>& sink) {
  HarvestResult result;
  const int s = cfg.scale;
  const int minSide = cfg.patchSize * s;
  if (hrIn.width() < minSide || hrIn.height() < minSide) {
    result.skipped = true;
    result.warning = "image " + std::to_string(hrIn.width()) + "x" + std::to_string(hrIn.height()) +
                     " is smaller than one patch at LR scale (needs " + std::to_string(minSide) + "x" +
                     std::to_string(minSide) + "); skipped";
    return result;
  }
  const GrayImage hr = trim_to_scale(hrIn, s);
  const GrayImage base = cheap_upscale(degrade(hr, s), s);
  const PatchFeaturizer featurizer(base, cfg);

  const int r = cfg.patchSize / 2;
  std::vector<double> patch;
  std::vector<double> scratch;
  TrainingPair pair;
  for (int y = r; y < hr.height() - r; ++y) {
    for (int x = r; x < hr.width() - r; ++x) {
      pair.x = x;
      pair.y = y;
      pair.feature = featurizer.feature_at(x, y, patch, scratch);
      if (codebook != nullptr) pair.bucket = bucket_index(nearest_centroid(pair.feature, *codebook), x, y, cfg);
      pair.patch = patch;
      pair.target = hr.at(x, y);
      sink(pair);
      ++result.pairs;
    }
  }
  return result;
}

TrainAccumulator::TrainAccumulator(std::size_t buckets, std::size_t taps)
    : taps_(taps), gram_(buckets * taps * (taps + 1) / 2, 0.0), cross_(buckets * taps, 0.0), counts_(buckets, 0) {}

void TrainAccumulator::add(std::size_t bucket, std::span<const double> a, double b) {
  if (bucket >= counts_.size()) {
    throw std::out_of_range("bucket " + std::to_string(bucket) + " out of range (" + std::to_string(counts_.size()) +
                            " buckets)");
  }
  if (a.size() != taps_) throw ArgumentError("patch length does not match accumulator taps");
  double* g = gram_.data() + bucket * packed_size();
  double* c = cross_.data() + bucket * taps_;
  for (std::size_t i = 0; i < taps_; ++i) {
    const double ai = a[i];
    c[i] += ai * b;
    for (std::size_t j = i; j < taps_; ++j) *g++ += ai * a[j];
  }
  ++counts_[bucket];
}

void TrainAccumulator::merge(const TrainAccumulator& other) {
  if (other.taps_ != taps_ || other.counts_.size() != counts_.size()) {
    throw ArgumentError("cannot merge accumulators of different shapes");
  }
  for (std::size_t i = 0; i < gram_.size(); ++i) gram_[i] += other.gram_[i];
  for (std::size_t i = 0; i < cross_.size(); ++i) cross_[i] += other.cross_[i];
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

double TrainAccumulator::gram(std::size_t bucket, std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  // Row i of the packed upper triangle starts at i*taps - i*(i-1)/2.
  const std::size_t offset = i * taps_ - i * (i - 1) / 2 + (j - i);
  return gram_[bucket * packed_size() + offset];
}

std::vector<double> TrainAccumulator::dense_gram(std::size_t bucket) const {
  std::vector<double> dense(taps_ * taps_);
  const double* g = gram_.data() + bucket * packed_size();
  for (std::size_t i = 0; i < taps_; ++i) {
    for (std::size_t j = i; j < taps_; ++j) {
      dense[i * taps_ + j] = *g;
      dense[j * taps_ + i] = *g;
      ++g;
    }
  }
  return dense;
}

TrainAccumulator merged(TrainAccumulator a, const TrainAccumulator& b) {
  a.merge(b);
  return a;
}

bool cholesky_solve(std::vector<double>& m, std::vector<double>& rhs, std::size_t n, double relPivot) {
  double maxDiag = 0.0;
  for (std::size_t i = 0; i < n; ++i) maxDiag = std::max(maxDiag, m[i * n + i]);
  if (!(maxDiag > 0.0) || !std::isfinite(maxDiag)) return false;
  const double threshold = relPivot * maxDiag;
  // Lower factor overwrites the lower triangle.
  for (std::size_t j = 0; j < n; ++j) {
    double d = m[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= m[j * n + k] * m[j * n + k];
    if (!(d > threshold)) return false;
    const double l = std::sqrt(d);
    m[j * n + j] = l;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = m[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= m[i * n + k] * m[j * n + k];
      m[i * n + j] = v / l;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double v = rhs[i];
    for (std::size_t k = 0; k < i; ++k) v -= m[i * n + k] * rhs[k];
    rhs[i] = v / m[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double v = rhs[i];
    for (std::size_t k = i + 1; k < n; ++k) v -= m[k * n + i] * rhs[k];
    rhs[i] = v / m[i * n + i];
  }
  return true;
}

FilterSolution solve_filters(const TrainAccumulator& acc, double ridgeLambda, std::int64_t minSamples,
                             unsigned threads) {
  const std::size_t d = acc.taps();
  const std::size_t buckets = acc.buckets();
  FilterSolution sol;
  sol.filters.assign(buckets * d, 0.0);
  sol.fallback.assign(buckets, 0);
  parallel_for(buckets, threads, [&](std::size_t q) {
    std::span<double> h(sol.filters.data() + q * d, d);
    bool ok = acc.count(q) > 0 && static_cast<std::int64_t>(acc.count(q)) >= minSamples;
    if (ok) {
      std::vector<double> m = acc.dense_gram(q);
      double trace = 0.0;
      for (std::size_t i = 0; i < d; ++i) trace += m[i * d + i];
      const double ridge = ridgeLambda * trace / static_cast<double>(d);
      for (std::size_t i = 0; i < d; ++i) m[i * d + i] += ridge;
      std::vector<double> rhs(acc.cross(q).begin(), acc.cross(q).end());
      ok = cholesky_solve(m, rhs, d) && std::all_of(rhs.begin(), rhs.end(), [](double v) { return std::isfinite(v); });
      if (ok) std::copy(rhs.begin(), rhs.end(), h.begin());
    }
    if (!ok) {
      set_delta(h);
      sol.fallback[q] = 1;
    }
  });
  return sol;
}

FilterSolution solve_filters(const TrainAccumulator& acc, const TrainConfig& cfg, unsigned threads) {
  return solve_filters(acc, cfg.ridgeLambda, cfg.effective_min_samples(), threads);
}

namespace {

using ImageSource = std::function<GrayImage(std::size_t)>;

Model train_from(std::size_t imageCount, const ImageSource& source, const TrainConfig& cfg, unsigned threads,
                 TrainStats* statsOut) {
  validate(cfg);
  if (imageCount == 0) throw ArgumentError("training needs at least one image");
  TrainStats stats;
  stats.images = imageCount;

  // Pass 1: features from every image, concatenated in input order.
  std::vector<std::vector<FeatureVector>> perImage(imageCount);
  std::vector<HarvestResult> harvests(imageCount);
  parallel_for(imageCount, threads, [&](std::size_t i) {
    auto& out = perImage[i];
    harvests[i] = harvest_pairs(source(i), cfg, nullptr, [&](const TrainingPair& p) { out.push_back(p.feature); });
  });
  std::vector<FeatureVector> features;
  for (std::size_t i = 0; i < imageCount; ++i) {
    if (harvests[i].skipped) {
      ++stats.skippedImages;
      stats.warnings.push_back("image " + std::to_string(i) + ": " + harvests[i].warning);
    }
    stats.pairs += harvests[i].pairs;
    features.insert(features.end(), perImage[i].begin(), perImage[i].end());
    std::vector<FeatureVector>().swap(perImage[i]);
  }
  if (features.empty()) throw TrainingError("no usable training pairs (all images too small or missing)");
  if (features.size() < cfg.clusters) {
    throw TrainingError("only " + std::to_string(features.size()) + " training pairs for " +
                        std::to_string(cfg.clusters) + " clusters");
  }

  const std::vector<FeatureVector> sample = stride_subsample(features, cfg.featureCap);
  std::vector<FeatureVector>().swap(features);
  stats.clusteredFeatures = sample.size();
  KMeansOptions km;
  km.k = cfg.clusters;
  km.seed = cfg.seed;
  km.maxIter = cfg.kmeansMaxIter;
  km.tol = cfg.kmeansTol;
  km.threads = threads;
  KMeansTrace trace;
  Codebook codebook = kmeans_fit(sample, km, &trace);
  stats.kmeansIterations = trace.iterations;

  // Pass 2: per-image accumulators merged in input order, so the totals do
  // not depend on how images were spread over workers.
  const std::size_t buckets = cfg.bucket_count();
  const auto taps = static_cast<std::size_t>(cfg.taps());
  TrainAccumulator total(buckets, taps);
  const std::size_t wave = std::min<std::size_t>(resolve_threads(threads), imageCount);
  for (std::size_t start = 0; start < imageCount; start += wave) {
    const std::size_t count = std::min(wave, imageCount - start);
    std::vector<TrainAccumulator> local(count);
    parallel_for(count, threads, [&](std::size_t i) {
      local[i] = TrainAccumulator(buckets, taps);
      harvest_pairs(source(start + i), cfg, &codebook,
                    [&](const TrainingPair& p) { local[i].add(*p.bucket, p.patch, p.target); });
    });
    for (const TrainAccumulator& acc : local) total.merge(acc);
  }

  FilterSolution sol = solve_filters(total, cfg, threads);
  Model model;
  model.config = cfg;
  model.config.minSamples = cfg.effective_min_samples();
  model.codebook = std::move(codebook);
  model.filters = std::move(sol.filters);
  model.fallback = std::move(sol.fallback);
  model.counts.assign(total.counts().begin(), total.counts().end());
  stats.flatFidelityReplacements = enforce_flat_fidelity(model);
  if (statsOut != nullptr) *statsOut = std::move(stats);
  return model;
}

}  // namespace

Model train(const std::vector<std::filesystem::path>& hrPaths, const TrainConfig& cfg, unsigned threads,
            TrainStats* stats) {
  // Fail on unreadable inputs before any work starts.
  for (const auto& p : hrPaths) (void)load_image(p);
  return train_from(
      hrPaths.size(), [&](std::size_t i) { return load_image(hrPaths[i]); }, cfg, threads, stats);
}

Model train_images(const std::vector<GrayImage>& hrImages, const TrainConfig& cfg, unsigned threads,
                   TrainStats* stats) {
  return train_from(
      hrImages.size(), [&](std::size_t i) { return hrImages[i]; }, cfg, threads, stats);
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("cannot read directory '" + dir.string() + "'");
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".pgm") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  return out;
}

}  // namespace phsar
