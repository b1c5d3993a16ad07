#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "json.hpp"
#include "phsar/error.hpp"
#include "phsar/model.hpp"

namespace phsar {

using nlohmann::json;

namespace {

constexpr char kMagic[6] = {'P', 'H', 'S', 'A', 'R', '\0'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, const std::string& origin) : bytes_(bytes), origin_(origin) {}

  std::span<const std::uint8_t> take(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      throw IoError("unexpected end of file in model '" + origin_ + "' (needed " + std::to_string(n) +
                    " bytes at offset " + std::to_string(pos_) + ")");
    }
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32() {
    const auto s = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | s[static_cast<std::size_t>(i)];
    return v;
  }
  double f64() {
    const auto s = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | s[static_cast<std::size_t>(i)];
    return std::bit_cast<double>(v);
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::string origin_;
};

json config_to_json(const TrainConfig& c) {
  return json{
      {"scale", c.scale},
      {"patchSize", c.patchSize},
      {"clusters", c.clusters},
      {"ridgeLambda", c.ridgeLambda},
      {"minSamples", c.minSamples},
      {"pst", {{"strength", c.pst.strength}, {"warp", c.pst.warp}, {"lpSigma", c.pst.lpSigma}}},
      {"weights",
       {{"strength", c.weights.strength},
        {"coherence", c.weights.coherence},
        {"angle", c.weights.angle},
        {"pst", c.weights.pst}}},
      {"seed", c.seed},
      {"phaseStratify", c.phaseStratify},
      {"kmeansMaxIter", c.kmeansMaxIter},
      {"kmeansTol", c.kmeansTol},
      {"featureCap", c.featureCap},
  };
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.scale = j.at("scale").get<int>();
  c.patchSize = j.at("patchSize").get<int>();
  c.clusters = j.at("clusters").get<std::size_t>();
  c.ridgeLambda = j.at("ridgeLambda").get<double>();
  c.minSamples = j.at("minSamples").get<std::int64_t>();
  c.pst.strength = j.at("pst").at("strength").get<double>();
  c.pst.warp = j.at("pst").at("warp").get<double>();
  c.pst.lpSigma = j.at("pst").at("lpSigma").get<double>();
  c.weights.strength = j.at("weights").at("strength").get<double>();
  c.weights.coherence = j.at("weights").at("coherence").get<double>();
  c.weights.angle = j.at("weights").at("angle").get<double>();
  c.weights.pst = j.at("weights").at("pst").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.phaseStratify = j.at("phaseStratify").get<bool>();
  c.kmeansMaxIter = j.at("kmeansMaxIter").get<int>();
  c.kmeansTol = j.at("kmeansTol").get<double>();
  c.featureCap = j.at("featureCap").get<std::size_t>();
  return c;
}

}  // namespace

void validate(const TrainConfig& c) {
  if (c.scale < 2 || c.scale > 4) throw ArgumentError("scale must be 2, 3 or 4 (got " + std::to_string(c.scale) + ")");
  if (c.patchSize < 3 || c.patchSize % 2 == 0) {
    throw ArgumentError("patch size must be an odd integer >= 3 (got " + std::to_string(c.patchSize) + ")");
  }
  if (c.clusters < 1) throw ArgumentError("cluster count must be >= 1");
  if (!(c.ridgeLambda >= 0.0) || !std::isfinite(c.ridgeLambda)) throw ArgumentError("ridge lambda must be >= 0");
  const FeatureWeights& w = c.weights;
  if (w.strength < 0.0 || w.coherence < 0.0 || w.angle < 0.0 || w.pst < 0.0) {
    throw ArgumentError("feature weights must be non-negative");
  }
  if (!(c.pst.strength >= 0.0)) throw ArgumentError("PST strength must be >= 0");
  if (!(c.pst.warp > 0.0)) throw ArgumentError("PST warp must be > 0");
  if (!(c.pst.lpSigma > 0.0)) throw ArgumentError("PST low-pass sigma must be > 0");
  if (c.kmeansMaxIter < 1) throw ArgumentError("k-means maxIter must be >= 1");
  if (!(c.kmeansTol >= 0.0)) throw ArgumentError("k-means tolerance must be >= 0");
}

std::size_t Model::fallback_count() const {
  return static_cast<std::size_t>(std::count(fallback.begin(), fallback.end(), std::uint8_t{1}));
}

void set_delta(std::span<double> filter) {
  std::fill(filter.begin(), filter.end(), 0.0);
  filter[filter.size() / 2] = 1.0;
}

bool is_delta(std::span<const double> filter) {
  for (std::size_t i = 0; i < filter.size(); ++i) {
    if (filter[i] != (i == filter.size() / 2 ? 1.0 : 0.0)) return false;
  }
  return true;
}

Model make_delta_model(const TrainConfig& cfg, Codebook codebook) {
  validate(cfg);
  if (codebook.k() != cfg.clusters) throw ArgumentError("codebook size does not match the configured cluster count");
  Model m;
  m.config = cfg;
  m.config.minSamples = cfg.effective_min_samples();
  m.codebook = std::move(codebook);
  const std::size_t buckets = cfg.bucket_count();
  m.filters.assign(buckets * static_cast<std::size_t>(cfg.taps()), 0.0);
  for (std::size_t b = 0; b < buckets; ++b) set_delta(m.filter(b));
  m.counts.assign(buckets, 0);
  m.fallback.assign(buckets, 1);
  return m;
}

std::size_t enforce_flat_fidelity(Model& model) {
  const std::size_t cluster = nearest_centroid(FeatureVector{}, model.codebook);
  const int s = model.config.phaseStratify ? model.config.scale : 1;
  std::size_t replaced = 0;
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      const std::size_t b = bucket_index(cluster, x, y, model.config);
      if (model.fallback[b] != 0) continue;
      const auto h = model.filter(b);
      double sum = 0.0;
      for (double v : h) sum += v;
      if (std::abs(sum - 1.0) > 1e-3) {
        set_delta(h);
        model.fallback[b] = 1;
        ++replaced;
      }
    }
  }
  return replaced;
}

std::vector<std::uint8_t> serialize_model(const Model& m) {
  const std::size_t buckets = m.bucket_count();
  const std::size_t taps = m.taps();
  if (m.filters.size() != buckets * taps || m.fallback.size() != buckets || m.codebook.k() != m.config.clusters) {
    throw ArgumentError("inconsistent model: filter/bucket/codebook sizes disagree");
  }
  json header = {
      {"config", config_to_json(m.config)},
      {"k", m.codebook.k()},
      {"bucketCount", buckets},
      {"taps", taps},
      {"seed", m.codebook.seed},
      {"counts", m.counts},
      {"fallback", m.fallback},
  };
  const std::string text = header.dump();
  std::vector<std::uint8_t> out;
  out.reserve(sizeof(kMagic) + 8 + text.size() + 8 * (m.codebook.k() * kFeatureDims + m.filters.size()));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, m.formatVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const FeatureVector& c : m.codebook.centroids) {
    for (double v : c) put_f64(out, v);
  }
  for (double v : m.filters) put_f64(out, v);
  return out;
}

Model parse_model(std::span<const std::uint8_t> bytes, const std::string& origin) {
  Reader in(bytes, origin);
  const auto magic = in.take(sizeof(kMagic));
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic),
                  [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); })) {
    throw FormatError("'" + origin + "' is not a PHSAR model (bad magic)");
  }
  Model m;
  m.formatVersion = in.u32();
  if (m.formatVersion != Model::kFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(m.formatVersion) + " in '" + origin + "'");
  }
  const std::uint32_t headerLen = in.u32();
  const auto headerBytes = in.take(headerLen);
  json header;
  try {
    header = json::parse(headerBytes.begin(), headerBytes.end());
    m.config = config_from_json(header.at("config"));
    m.codebook.seed = header.at("seed").get<std::uint64_t>();
    m.counts = header.at("counts").get<std::vector<std::uint64_t>>();
    m.fallback = header.at("fallback").get<std::vector<std::uint8_t>>();
    const auto k = header.at("k").get<std::size_t>();
    const auto buckets = header.at("bucketCount").get<std::size_t>();
    const auto taps = header.at("taps").get<std::size_t>();
    if (k != m.config.clusters || buckets != m.config.bucket_count() ||
        taps != static_cast<std::size_t>(m.config.taps()) || m.counts.size() != buckets ||
        m.fallback.size() != buckets) {
      throw FormatError("model header of '" + origin + "' is internally inconsistent");
    }
    validate(m.config);
  } catch (const json::exception& e) {
    throw FormatError("malformed model header in '" + origin + "': " + e.what());
  } catch (const ArgumentError& e) {
    throw FormatError("invalid configuration in model '" + origin + "': " + e.what());
  }

  m.codebook.centroids.resize(m.config.clusters);
  for (FeatureVector& c : m.codebook.centroids) {
    for (double& v : c) v = in.f64();
  }
  m.filters.resize(m.config.bucket_count() * static_cast<std::size_t>(m.config.taps()));
  for (double& v : m.filters) v = in.f64();
  if (!in.at_end()) throw FormatError("trailing bytes after model payload in '" + origin + "'");
  if (!std::all_of(m.filters.begin(), m.filters.end(), [](double v) { return std::isfinite(v); })) {
    throw FormatError("non-finite filter coefficient in '" + origin + "'");
  }
  return m;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing model '" + path.string() + "'");
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_model(bytes, path.string());
}

std::string model_digest(const Model& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : serialize_model(model)) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace phsar
