#include "phsar/bench.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "phsar/error.hpp"
#include "phsar/learner.hpp"
#include "phsar/upscaler.hpp"

namespace phsar {

using nlohmann::ordered_json;

double psnr(const GrayImage& a, const GrayImage& b, double peak) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ArgumentError("PSNR of differently sized images (" + std::to_string(a.width()) + "x" +
                        std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                        std::to_string(b.height()) + ")");
  }
  if (!(peak > 0.0)) throw ArgumentError("PSNR peak must be > 0");
  double sse = 0.0;
  const auto sa = a.samples();
  const auto sb = b.samples();
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double d = sa[i] - sb[i];
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(sa.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

namespace {

template <typename Fn>
double best_millis(int runs, Fn&& fn) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < std::max(1, runs); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

GrayImage crop_border(const GrayImage& img, int border) {
  if (img.width() <= 2 * border || img.height() <= 2 * border) return img;
  return img.crop(border, border, img.width() - 2 * border, img.height() - 2 * border);
}

ordered_json db(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

EvalAggregate aggregate_rows(const std::vector<EvalRow>& rows) {
  EvalAggregate agg;
  if (rows.empty()) return agg;
  const double n = static_cast<double>(rows.size());
  bool allAblated = true;
  bool allAblatedMs = true;
  double ablated = 0.0;
  double ablatedMs = 0.0;
  for (const EvalRow& r : rows) {
    agg.psnrBicubic += r.psnrBicubic;
    agg.psnrModel += r.psnrModel;
    agg.upscaleMillis += r.upscaleMillis;
    agg.bicubicMillis += r.bicubicMillis;
    if (r.psnrAblated) ablated += *r.psnrAblated; else allAblated = false;
    if (r.ablatedMillis) ablatedMs += *r.ablatedMillis; else allAblatedMs = false;
  }
  agg.psnrBicubic /= n;
  agg.psnrModel /= n;
  agg.upscaleMillis /= n;
  agg.bicubicMillis /= n;
  if (allAblated) agg.psnrAblated = ablated / n;
  if (allAblatedMs) agg.ablatedMillis = ablatedMs / n;
  return agg;
}

EvalReport evaluate_images(const Model& model, const std::vector<std::pair<std::string, GrayImage>>& images,
                           const EvalOptions& opts) {
  if (images.empty()) throw ArgumentError("evaluation needs at least one image");
  if (opts.ablated != nullptr) {
    if (opts.ablated->config.weights.pst != 0.0) {
      throw ArgumentError("ablated model must be trained with PST weight 0");
    }
    if (opts.ablated->config.scale != model.config.scale) throw ArgumentError("ablated model has a different scale");
  }
  const int s = model.config.scale;
  EvalReport report;
  report.scale = s;
  report.crop = s;
  report.peak = 1.0;
  report.timingRuns = std::max(1, opts.timingRuns);
  report.modelHash = model_digest(model);
  if (opts.ablated != nullptr) report.ablatedModelHash = model_digest(*opts.ablated);
  report.config = model.config;
  report.hardwareThreads = std::thread::hardware_concurrency();

  const UpscaleOptions up{opts.threads};
  for (const auto& [name, image] : images) {
    const GrayImage hr = trim_to_scale(image, s);
    const GrayImage lr = degrade(hr, s);
    EvalRow row;
    row.name = name;
    GrayImage bicubic;
    GrayImage learned;
    row.bicubicMillis = best_millis(opts.timingRuns, [&] { bicubic = cheap_upscale(lr, s); });
    row.upscaleMillis = best_millis(opts.timingRuns, [&] { learned = upscale(lr, model, up); });
    const GrayImage ref = crop_border(hr, s);
    row.psnrBicubic = psnr(crop_border(bicubic, s), ref);
    row.psnrModel = psnr(crop_border(learned, s), ref);
    if (opts.ablated != nullptr) {
      GrayImage ablated;
      row.ablatedMillis =
          best_millis(opts.timingRuns, [&] { ablated = upscale_ablated(lr, *opts.ablated, true, up); });
      row.psnrAblated = psnr(crop_border(ablated, s), ref);
    }
    report.rows.push_back(std::move(row));
  }
  report.aggregate = aggregate_rows(report.rows);
  return report;
}

EvalReport evaluate(const Model& model, const std::filesystem::path& hrDir, const EvalOptions& opts) {
  const auto paths = list_images(hrDir);
  if (paths.empty()) throw ArgumentError("no .png/.pgm images in '" + hrDir.string() + "'");
  std::vector<std::pair<std::string, GrayImage>> images;
  images.reserve(paths.size());
  for (const auto& p : paths) images.emplace_back(p.filename().string(), load_image(p));
  return evaluate_images(model, images, opts);
}

std::string report_to_json(const EvalReport& r) {
  ordered_json rows = ordered_json::array();
  for (const EvalRow& row : r.rows) {
    ordered_json j;
    j["name"] = row.name;
    j["psnrBicubic"] = db(row.psnrBicubic);
    j["psnrModel"] = db(row.psnrModel);
    if (row.psnrAblated) j["psnrAblated"] = db(*row.psnrAblated);
    j["upscaleMillis"] = row.upscaleMillis;
    j["bicubicMillis"] = row.bicubicMillis;
    if (row.ablatedMillis) j["ablatedMillis"] = *row.ablatedMillis;
    rows.push_back(std::move(j));
  }
  ordered_json agg;
  agg["psnrBicubic"] = db(r.aggregate.psnrBicubic);
  agg["psnrModel"] = db(r.aggregate.psnrModel);
  if (r.aggregate.psnrAblated) agg["psnrAblated"] = db(*r.aggregate.psnrAblated);
  agg["upscaleMillis"] = r.aggregate.upscaleMillis;
  agg["bicubicMillis"] = r.aggregate.bicubicMillis;
  if (r.aggregate.ablatedMillis) agg["ablatedMillis"] = *r.aggregate.ablatedMillis;

  ordered_json cfg;
  cfg["scale"] = r.scale;
  cfg["modelHash"] = r.modelHash;
  if (!r.ablatedModelHash.empty()) cfg["ablatedModelHash"] = r.ablatedModelHash;
  cfg["seed"] = r.config.seed;
  cfg["patchSize"] = r.config.patchSize;
  cfg["clusters"] = r.config.clusters;
  cfg["ridgeLambda"] = r.config.ridgeLambda;
  cfg["phaseStratify"] = r.config.phaseStratify;
  cfg["pst"] = {{"strength", r.config.pst.strength}, {"warp", r.config.pst.warp}, {"lpSigma", r.config.pst.lpSigma}};
  cfg["pstWeight"] = r.config.weights.pst;
  cfg["psnr"] = {{"peak", r.peak},
                 {"borderCrop", r.crop},
                 {"degradation", "antialiased bicubic (Catmull-Rom) downscale"},
                 {"timing", "best of " + std::to_string(r.timingRuns) + ", steady clock"}};
  cfg["machine"] = {{"hardwareThreads", r.hardwareThreads}};

  ordered_json out;
  out["config"] = std::move(cfg);
  out["images"] = std::move(rows);
  out["aggregate"] = std::move(agg);
  return out.dump(2) + "\n";
}

void print_report_table(const EvalReport& r, std::ostream& out) {
  const bool ablated = r.aggregate.psnrAblated.has_value();
  auto fmt = [](double v) {
    std::ostringstream s;
    if (std::isinf(v)) s << "inf"; else s << std::fixed << std::setprecision(3) << v;
    return s.str();
  };
  out << std::left << std::setw(24) << "image" << std::right << std::setw(12) << "bicubic dB" << std::setw(12)
      << "model dB";
  if (ablated) out << std::setw(12) << "ablated dB";
  out << std::setw(12) << "model ms" << std::setw(12) << "bicubic ms" << '\n';
  auto line = [&](const std::string& name, double b, double m, std::optional<double> a, double ms, double bms) {
    out << std::left << std::setw(24) << name << std::right << std::setw(12) << fmt(b) << std::setw(12) << fmt(m);
    if (ablated) out << std::setw(12) << (a ? fmt(*a) : "-");
    out << std::setw(12) << fmt(ms) << std::setw(12) << fmt(bms) << '\n';
  };
  for (const EvalRow& row : r.rows) {
    line(row.name, row.psnrBicubic, row.psnrModel, row.psnrAblated, row.upscaleMillis, row.bicubicMillis);
  }
  const EvalAggregate& a = r.aggregate;
  line("mean", a.psnrBicubic, a.psnrModel, a.psnrAblated, a.upscaleMillis, a.bicubicMillis);
}

}  // namespace phsar
