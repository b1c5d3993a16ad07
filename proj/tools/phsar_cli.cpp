// phsar: train, apply and evaluate phase-stretch anchored regression
// super-resolution models.
//
// Exit codes: 0 success, 2 bad arguments, 3 I/O or format errors, 4 training
// errors. Diagnostics go to stderr.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "phsar/bench.hpp"
#include "phsar/error.hpp"
#include "phsar/learner.hpp"
#include "phsar/model.hpp"
#include "phsar/pst.hpp"
#include "phsar/upscaler.hpp"

namespace {

constexpr int kExitArgs = 2;
constexpr int kExitIo = 3;
constexpr int kExitTraining = 4;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Expands `--config FILE` into flags. Each non-comment line is `key = value`
// where key is a long flag name without the dashes; boolean flags take
// true/false. Flags already present on the command line win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string configPath;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      configPath = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      configPath = args[i].substr(9);
    }
  }
  if (configPath.empty()) return args;
  std::ifstream in(configPath);
  if (!in) throw phsar::IoError("cannot read config file '" + configPath + "'");

  auto present = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> extra;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw phsar::ArgumentError(configPath + ":" + std::to_string(lineNo) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    const std::string flag = "--" + key;
    if (present(flag)) continue;
    if (value == "true") {
      extra.push_back(flag);
    } else if (value != "false") {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  // Subcommand name stays first so the extra flags bind to it.
  const std::size_t insertAt = args.empty() ? 0 : 1;
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(insertAt), extra.begin(), extra.end());
  return args;
}

void require(bool ok, const std::string& flag, const std::string& what) {
  if (!ok) throw phsar::ArgumentError(flag + ": " + what);
}

struct PstFlags {
  double s = phsar::PstParams{}.strength;
  double w = phsar::PstParams{}.warp;
  double sigma = phsar::PstParams{}.lpSigma;

  void add(CLI::App* app) {
    app->add_option("--pst-s", s, "PST phase strength (radians)")->capture_default_str();
    app->add_option("--pst-w", w, "PST frequency warp")->capture_default_str();
    app->add_option("--pst-sigma", sigma, "PST low-pass width (fraction of max radius)")->capture_default_str();
  }
  phsar::PstParams validated() const {
    require(std::isfinite(s) && s >= 0.0, "--pst-s", "must be >= 0");
    require(std::isfinite(w) && w > 0.0, "--pst-w", "must be > 0");
    require(std::isfinite(sigma) && sigma > 0.0, "--pst-sigma", "must be > 0");
    return {s, w, sigma};
  }
};

struct TrainFlags {
  std::string hrDir;
  std::string out;
  int scale = 2;
  int patch = 11;
  int clusters = 64;
  double ridge = 1e-6;
  long long minSamples = -1;
  unsigned long long seed = 0;
  bool noPst = false;
  bool noPhaseStratify = false;
  int maxIter = 100;
  std::size_t featureCap = 2'000'000;
  PstFlags pst;
};

int run_train(const TrainFlags& f, unsigned threads) {
  require(f.scale >= 2 && f.scale <= 4, "--scale", "must be 2, 3 or 4 (got " + std::to_string(f.scale) + ")");
  require(f.patch >= 3 && f.patch % 2 == 1, "--patch", "must be an odd integer >= 3 (got " + std::to_string(f.patch) + ")");
  require(f.clusters >= 1, "--clusters", "must be >= 1");
  require(std::isfinite(f.ridge) && f.ridge >= 0.0, "--ridge", "must be >= 0");
  require(f.maxIter >= 1, "--kmeans-iter", "must be >= 1");
  phsar::TrainConfig cfg;
  cfg.scale = f.scale;
  cfg.patchSize = f.patch;
  cfg.clusters = static_cast<std::size_t>(f.clusters);
  cfg.ridgeLambda = f.ridge;
  cfg.minSamples = f.minSamples;
  cfg.seed = f.seed;
  cfg.pst = f.pst.validated();
  cfg.weights.pst = f.noPst ? 0.0 : 1.0;
  cfg.phaseStratify = !f.noPhaseStratify;
  cfg.kmeansMaxIter = f.maxIter;
  cfg.featureCap = f.featureCap;

  const auto paths = phsar::list_images(f.hrDir);
  if (paths.empty()) throw phsar::IoError("no .png/.pgm images in '" + f.hrDir + "'");
  std::cerr << "training on " << paths.size() << " images from " << f.hrDir << '\n';
  phsar::TrainStats stats;
  const phsar::Model model = phsar::train(paths, cfg, threads, &stats);
  for (const auto& w : stats.warnings) std::cerr << "warning: " << w << '\n';
  phsar::save_model(model, f.out);

  std::size_t empty = 0;
  std::uint64_t minFill = UINT64_MAX;
  std::uint64_t maxFill = 0;
  for (auto c : model.counts) {
    if (c == 0) ++empty;
    minFill = std::min(minFill, c);
    maxFill = std::max(maxFill, c);
  }
  std::cout << "pairs: " << stats.pairs << "\n"
            << "clustered features: " << stats.clusteredFeatures << " (k-means iterations: " << stats.kmeansIterations
            << ")\n"
            << "buckets: " << model.bucket_count() << " (empty " << empty << ", min fill " << minFill
            << ", max fill " << maxFill << ", mean fill "
            << static_cast<double>(stats.pairs) / static_cast<double>(model.bucket_count()) << ")\n"
            << "fallback filters: " << model.fallback_count() << " (flat-region replacements "
            << stats.flatFidelityReplacements << ")\n"
            << "model: " << f.out << " [" << phsar::model_digest(model) << "]\n";
  return 0;
}

int run_upscale(const std::string& modelPath, const std::string& input, const std::string& output, unsigned threads) {
  const phsar::Model model = phsar::load_model(modelPath);
  const phsar::GrayImage lr = phsar::load_image(input);
  const phsar::GrayImage hr = phsar::upscale(lr, model, {threads});
  phsar::save_image(hr, output);
  std::cerr << input << " (" << lr.width() << "x" << lr.height() << ") -> " << output << " (" << hr.width() << "x"
            << hr.height() << ")\n";
  return 0;
}

int run_eval(const std::string& modelPath, const std::string& hrDir, const std::string& reportPath, bool ablate,
             const std::string& ablatedPath, unsigned threads) {
  const phsar::Model model = phsar::load_model(modelPath);
  std::optional<phsar::Model> ablated;
  if (ablate) {
    ablated = ablatedPath.empty() ? model : phsar::load_model(ablatedPath);
    require(ablated->config.weights.pst == 0.0, ablatedPath.empty() ? "--ablate" : "--ablated-model",
            "the ablation model must be trained with --no-pst");
  }
  phsar::EvalOptions opts;
  opts.threads = threads;
  if (ablated) opts.ablated = &*ablated;
  const phsar::EvalReport report = phsar::evaluate(model, hrDir, opts);
  if (!reportPath.empty()) {
    std::ofstream out(reportPath);
    if (!out) throw phsar::IoError("cannot write report '" + reportPath + "'");
    out << phsar::report_to_json(report);
    if (!out) throw phsar::IoError("failed writing report '" + reportPath + "'");
  }
  phsar::print_report_table(report, std::cout);
  return 0;
}

int run_pst(const std::string& input, const std::string& output, const PstFlags& flags) {
  const phsar::PstParams params = flags.validated();
  const phsar::GrayImage img = phsar::load_image(input);
  const phsar::PhaseImage phase = phsar::apply_pst(img, phsar::build_kernel(img.width(), img.height(), params));
  const auto [lo, hi] = std::minmax_element(phase.phase.begin(), phase.phase.end());
  const double range = *hi - *lo;
  std::vector<double> scaled(phase.phase.size(), 0.0);
  if (range > 0.0) {
    std::transform(phase.phase.begin(), phase.phase.end(), scaled.begin(),
                   [&](double v) { return (v - *lo) / range; });
  }
  phsar::save_image(phsar::GrayImage(phase.width, phase.height, std::move(scaled)), output);
  std::cerr << "phase range [" << *lo << ", " << *hi << "] rad -> " << output << '\n';
  return 0;
}

int run_inspect(const std::string& modelPath) {
  const phsar::Model model = phsar::load_model(modelPath);
  const auto& c = model.config;
  std::cout << "format version: " << model.formatVersion << "\n"
            << "digest: " << phsar::model_digest(model) << "\n"
            << "scale: " << c.scale << "\n"
            << "patch size: " << c.patchSize << " (" << c.taps() << " taps)\n"
            << "clusters: " << c.clusters << "\n"
            << "buckets: " << model.bucket_count() << (c.phaseStratify ? " (phase stratified)" : "") << "\n"
            << "ridge lambda: " << c.ridgeLambda << "\n"
            << "min samples: " << c.minSamples << "\n"
            << "seed: " << c.seed << "\n"
            << "pst: strength " << c.pst.strength << ", warp " << c.pst.warp << ", lp sigma " << c.pst.lpSigma << "\n"
            << "feature weights: strength " << c.weights.strength << ", coherence " << c.weights.coherence
            << ", angle " << c.weights.angle << ", pst " << c.weights.pst << "\n"
            << "fallback filters: " << model.fallback_count() << "\n\n"
            << "bucket      count  fallback      l2 norm     tap sum\n";
  for (std::size_t b = 0; b < model.bucket_count(); ++b) {
    double norm = 0.0;
    double sum = 0.0;
    for (double v : model.filter(b)) {
      norm += v * v;
      sum += v;
    }
    std::cout << std::setw(6) << b << std::setw(11) << model.counts[b] << std::setw(10)
              << (model.fallback[b] ? "yes" : "no") << std::setw(13) << std::fixed << std::setprecision(5)
              << std::sqrt(norm) << std::setw(12) << sum << std::defaultfloat << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-stretch anchored regression super-resolution", "phsar"};
  app.require_subcommand(1);
  unsigned threads = 0;
  std::string configPath;
  auto addCommon = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "Worker cap (0 = all cores); results do not depend on it");
    sub->add_option("--config", configPath, "File of 'key = value' lines; command-line flags override");
  };

  TrainFlags tf;
  auto* train = app.add_subcommand("train", "Learn a filter bank from high-resolution images");
  train->add_option("--hr-dir", tf.hrDir, "Directory of HR training images")->required();
  train->add_option("--out", tf.out, "Output model file (.phsar)")->required();
  train->add_option("--scale", tf.scale, "Upscale factor (2, 3 or 4)")->capture_default_str();
  train->add_option("--patch", tf.patch, "Patch side length (odd)")->capture_default_str();
  train->add_option("--clusters", tf.clusters, "Number of k-means anchors")->capture_default_str();
  train->add_option("--ridge", tf.ridge, "Relative ridge weight")->capture_default_str();
  train->add_option("--min-samples", tf.minSamples, "Samples needed to fit a bucket (-1 = 4 * patch^2)")
      ->capture_default_str();
  train->add_option("--seed", tf.seed, "Seed for k-means++ initialisation")->capture_default_str();
  train->add_option("--kmeans-iter", tf.maxIter, "Maximum Lloyd iterations")->capture_default_str();
  train->add_option("--feature-cap", tf.featureCap, "Max features clustered (stride subsample)")
      ->capture_default_str();
  train->add_flag("--no-pst", tf.noPst, "Drop the PST descriptor (ablation model)");
  train->add_flag("--no-phase-stratify", tf.noPhaseStratify, "One filter per cluster instead of per pixel phase");
  tf.pst.add(train);
  addCommon(train);

  std::string modelPath;
  std::string input;
  std::string output;
  auto* up = app.add_subcommand("upscale", "Upscale an image with a trained model");
  up->add_option("--model", modelPath, "Model file")->required();
  up->add_option("--input", input, "Low-resolution input image")->required();
  up->add_option("--output", output, "Output image (.png or .pgm)")->required();
  addCommon(up);

  std::string hrDir;
  std::string reportPath;
  std::string ablatedPath;
  bool ablate = false;
  auto* ev = app.add_subcommand("eval", "PSNR/runtime comparison against bicubic upscaling");
  ev->add_option("--model", modelPath, "Model file")->required();
  ev->add_option("--hr-dir", hrDir, "Directory of HR reference images")->required();
  ev->add_option("--report", reportPath, "JSON report output path");
  ev->add_flag("--ablate", ablate, "Add the no-PST ablation column");
  ev->add_option("--ablated-model", ablatedPath, "Model trained with --no-pst (default: --model itself)");
  addCommon(ev);

  PstFlags pf;
  auto* pst = app.add_subcommand("pst", "Write the PST phase image rescaled to [0, 1]");
  pst->add_option("--input", input, "Input image")->required();
  pst->add_option("--output", output, "Output image")->required();
  pf.add(pst);
  addCommon(pst);

  auto* inspect = app.add_subcommand("inspect", "Print a model's header and per-bucket filter statistics");
  inspect->add_option("--model", modelPath, "Model file")->required();
  addCommon(inspect);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 consumes vectors back to front
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitArgs;
  } catch (const phsar::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const phsar::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitArgs;
  }

  try {
    if (*train) return run_train(tf, threads);
    if (*up) return run_upscale(modelPath, input, output, threads);
    if (*ev) return run_eval(modelPath, hrDir, reportPath, ablate, ablatedPath, threads);
    if (*pst) return run_pst(input, output, pf);
    if (*inspect) return run_inspect(modelPath);
  } catch (const phsar::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitArgs;
  } catch (const phsar::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const phsar::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const phsar::TrainingError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitTraining;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitArgs;
}
