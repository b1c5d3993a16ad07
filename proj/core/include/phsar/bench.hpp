#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "phsar/image.hpp"
#include "phsar/model.hpp"

namespace phsar {

// Peak signal-to-noise ratio in dB; +infinity for identical images.
// Throws ArgumentError on a size mismatch or non-positive peak.
double psnr(const GrayImage& a, const GrayImage& b, double peak = 1.0);

struct EvalRow {
  std::string name;
  double psnrBicubic = 0.0;
  double psnrModel = 0.0;
  std::optional<double> psnrAblated;
  double upscaleMillis = 0.0;
  double bicubicMillis = 0.0;
  std::optional<double> ablatedMillis;
};

struct EvalAggregate {
  double psnrBicubic = 0.0;
  double psnrModel = 0.0;
  std::optional<double> psnrAblated;
  double upscaleMillis = 0.0;
  double bicubicMillis = 0.0;
  std::optional<double> ablatedMillis;
};

struct EvalReport {
  int scale = 0;
  int crop = 0;
  double peak = 1.0;
  int timingRuns = 0;
  std::string modelHash;
  std::string ablatedModelHash;
  TrainConfig config;
  unsigned hardwareThreads = 0;
  std::vector<EvalRow> rows;
  EvalAggregate aggregate;
};

struct EvalOptions {
  // Model used for the psnrAblated column (trained with PST weight 0). When
  // null no ablation column is produced.
  const Model* ablated = nullptr;
  unsigned threads = 0;
  int timingRuns = 3;
};

// Column means over the rows.
EvalAggregate aggregate_rows(const std::vector<EvalRow>& rows);

// Evaluates named HR images: trim, degrade, upscale (bicubic / model /
// ablated), PSNR on the region left after cropping `scale` pixels per side,
// best-of-N wall-clock timings. Rows keep the input order.
EvalReport evaluate_images(const Model& model, const std::vector<std::pair<std::string, GrayImage>>& images,
                           const EvalOptions& opts = {});

// Loads every .png/.pgm in hrDir (sorted by name) and evaluates it. Throws
// ArgumentError when the directory holds no images.
EvalReport evaluate(const Model& model, const std::filesystem::path& hrDir, const EvalOptions& opts = {});

std::string report_to_json(const EvalReport& report);
void print_report_table(const EvalReport& report, std::ostream& out);

}  // namespace phsar
