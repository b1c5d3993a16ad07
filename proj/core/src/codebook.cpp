#include "phsar/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "phsar/error.hpp"
#include "phsar/parallel.hpp"

namespace phsar {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Assignment and partial sums are computed per fixed-size chunk and reduced in
// chunk order, which keeps results independent of the worker count.
constexpr std::size_t kChunk = 8192;

struct ChunkSums {
  std::vector<FeatureVector> sum;
  std::vector<std::size_t> count;
  double sse = 0.0;
};

}  // namespace

Xorshift64Star::Xorshift64Star(std::uint64_t seed) : state_(splitmix64(seed)) {
  if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t Xorshift64Star::next() {
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  return state_ * 0x2545F4914F6CDD1DULL;
}

double Xorshift64Star::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::size_t Xorshift64Star::below(std::size_t n) {
  return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

std::size_t nearest_centroid(const FeatureVector& f, std::span<const FeatureVector> centroids) {
  std::size_t best = 0;
  double bestDist = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    const double d = squared_distance(f, centroids[j]);
    if (d < bestDist) {
      bestDist = d;
      best = j;
    }
  }
  return best;
}

std::vector<FeatureVector> stride_subsample(std::span<const FeatureVector> features, std::size_t cap) {
  if (cap == 0 || features.size() <= cap) return {features.begin(), features.end()};
  const std::size_t stride = (features.size() + cap - 1) / cap;
  std::vector<FeatureVector> out;
  out.reserve(cap);
  for (std::size_t i = 0; i < features.size(); i += stride) out.push_back(features[i]);
  return out;
}

Codebook kmeans_fit(std::span<const FeatureVector> features, const KMeansOptions& opts, KMeansTrace* trace) {
  const std::size_t n = features.size();
  const std::size_t k = opts.k;
  if (n == 0) throw ArgumentError("k-means needs at least one feature vector");
  if (k < 1 || k > n) {
    throw ArgumentError("k-means cluster count " + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
  }
  if (opts.maxIter < 1) throw ArgumentError("k-means maxIter must be >= 1");
  if (!(opts.tol >= 0.0)) throw ArgumentError("k-means tolerance must be >= 0");

  Codebook cb;
  cb.seed = opts.seed;
  cb.centroids.reserve(k);

  // k-means++ seeding.
  Xorshift64Star rng(opts.seed);
  cb.centroids.push_back(features[rng.below(n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(features[i], cb.centroids[0]);
  std::vector<double> cumulative(n);
  while (cb.centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += d2[i];
      cumulative[i] = total;
    }
    std::size_t pick;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      pick = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
      pick = std::min(pick, n - 1);
    } else {
      pick = rng.below(n);
    }
    cb.centroids.push_back(features[pick]);
    const FeatureVector& c = cb.centroids.back();
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(features[i], c));
  }

  // Lloyd iterations.
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<ChunkSums> partial(chunks);
  std::vector<std::uint32_t> assignment(n);
  std::vector<double> ownDist(n);
  KMeansTrace local;
  for (int iter = 0; iter < opts.maxIter; ++iter) {
    parallel_for(chunks, opts.threads, [&](std::size_t c) {
      ChunkSums& ps = partial[c];
      ps.sum.assign(k, FeatureVector{});
      ps.count.assign(k, 0);
      ps.sse = 0.0;
      const std::size_t end = std::min(n, (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < end; ++i) {
        const std::size_t j = nearest_centroid(features[i], cb.centroids);
        assignment[i] = static_cast<std::uint32_t>(j);
        const double d = squared_distance(features[i], cb.centroids[j]);
        ownDist[i] = d;
        ps.sse += d;
        for (std::size_t q = 0; q < kFeatureDims; ++q) ps.sum[j][q] += features[i][q];
        ++ps.count[j];
      }
    });
    std::vector<FeatureVector> sum(k, FeatureVector{});
    std::vector<std::size_t> count(k, 0);
    double sse = 0.0;
    for (const ChunkSums& ps : partial) {
      sse += ps.sse;
      for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t q = 0; q < kFeatureDims; ++q) sum[j][q] += ps.sum[j][q];
        count[j] += ps.count[j];
      }
    }
    local.sseHistory.push_back(sse);
    local.iterations = iter + 1;

    std::vector<bool> taken(n, false);
    double maxShift = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      FeatureVector next;
      if (count[j] == 0) {
        // Farthest point from its own centroid; ties to the lowest index.
        std::size_t far = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (!taken[i] && (far == n || ownDist[i] > ownDist[far])) far = i;
        }
        if (far == n) far = 0;
        taken[far] = true;
        next = features[far];
        ownDist[far] = 0.0;
      } else {
        const double cnt = static_cast<double>(count[j]);
        for (std::size_t q = 0; q < kFeatureDims; ++q) next[q] = sum[j][q] / cnt;
      }
      maxShift = std::max(maxShift, std::sqrt(squared_distance(next, cb.centroids[j])));
      cb.centroids[j] = next;
    }
    if (maxShift <= opts.tol) {
      local.converged = true;
      break;
    }
  }
  if (trace != nullptr) *trace = std::move(local);
  return cb;
}

}  // namespace phsar
