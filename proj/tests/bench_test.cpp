#include <gtest/gtest.h>

#include <cmath>
#include "json.hpp"

#include "oracles.hpp"
#include "phsar/bench.hpp"
#include "phsar/error.hpp"
#include "phsar/learner.hpp"
#include "test_support.hpp"

namespace phsar {
namespace {

TEST(Psnr, IdenticalImagesAreInfinite) {
  const GrayImage a = testing::random_image(9, 7, 1);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
  EXPECT_GT(psnr(a, a), 0.0);
}

TEST(Psnr, OneCodeValueOffset) {
  GrayImage a(64, 64, 0.5);
  GrayImage b(64, 64, 0.5 + 1.0 / 255.0);
  EXPECT_NEAR(psnr(a, b), 48.1308036086791, 1e-9);
  EXPECT_NEAR(psnr(a, b, 255.0) - psnr(a, b), 20.0 * std::log10(255.0), 1e-9);
}

TEST(Psnr, MatchesTwoPassOracleSymmetricAndMonotone) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GrayImage a = testing::random_image(31, 17, seed);
    const GrayImage b = testing::random_image(31, 17, seed + 100);
    EXPECT_NEAR(psnr(a, b), oracle::psnr_two_pass({a.samples().begin(), a.samples().end()}, {b.samples().begin(), b.samples().end()}, 1.0), 1e-10);
    EXPECT_EQ(psnr(a, b), psnr(b, a));
    GrayImage closer = a;
    for (std::size_t i = 0; i < a.size(); ++i) closer.samples()[i] = 0.5 * (a.samples()[i] + b.samples()[i]);
    EXPECT_GT(psnr(a, closer), psnr(a, b));
  }
}

TEST(Psnr, RejectsMismatch) {
  EXPECT_THROW(psnr(GrayImage(4, 4), GrayImage(4, 5)), ArgumentError);
  EXPECT_THROW(psnr(GrayImage(4, 4), GrayImage(4, 4), 0.0), ArgumentError);
}

TEST(Evaluate, DeltaModelTiesBicubic) {
  TrainConfig cfg;
  cfg.scale = 3;
  cfg.patchSize = 5;
  cfg.clusters = 2;
  Codebook cb{.seed = 0, .centroids = {FeatureVector{}, FeatureVector{1, 1, 0, 0, 0}}};
  const Model m = make_delta_model(cfg, cb);
  std::vector<std::pair<std::string, GrayImage>> imgs = {{"a", testing::textured_image(40, 34, 1)},
                                                          {"b", testing::textured_image(31, 47, 2)}};
  EvalOptions opts;
  opts.timingRuns = 1;
  const EvalReport r = evaluate_images(m, imgs, opts);
  ASSERT_EQ(r.rows.size(), 2u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.psnrModel, row.psnrBicubic);
    EXPECT_FALSE(row.psnrAblated);
    EXPECT_GT(row.upscaleMillis, 0.0);
    EXPECT_GT(row.bicubicMillis, 0.0);
  }
  EXPECT_EQ(r.rows[0].name, "a");
  EXPECT_EQ(r.scale, 3);
  EXPECT_EQ(r.crop, 3);
  EXPECT_DOUBLE_EQ(r.aggregate.psnrBicubic, 0.5 * (r.rows[0].psnrBicubic + r.rows[1].psnrBicubic));
}

TEST(Evaluate, AggregateIsColumnMean) {
  std::vector<EvalRow> rows(3);
  for (int i = 0; i < 3; ++i) {
    rows[i].psnrBicubic = 30 + i;
    rows[i].psnrModel = 31 + 2 * i;
    rows[i].psnrAblated = 30.5 + i;
    rows[i].upscaleMillis = 1 + i;
  }
  const EvalAggregate a = aggregate_rows(rows);
  EXPECT_DOUBLE_EQ(a.psnrBicubic, 31.0);
  EXPECT_DOUBLE_EQ(a.psnrModel, 33.0);
  ASSERT_TRUE(a.psnrAblated);
  EXPECT_DOUBLE_EQ(*a.psnrAblated, 31.5);
  EXPECT_DOUBLE_EQ(a.upscaleMillis, 2.0);
  EXPECT_FALSE(a.ablatedMillis);
}

TEST(Evaluate, JsonReportFields) {
  EvalReport r;
  r.scale = 2;
  r.crop = 2;
  r.modelHash = "abc";
  EvalRow row;
  row.name = "x.png";
  row.psnrBicubic = 30.0;
  row.psnrModel = std::numeric_limits<double>::infinity();
  row.psnrAblated = 29.5;
  r.rows.push_back(row);
  r.aggregate = aggregate_rows(r.rows);
  const auto j = nlohmann::json::parse(report_to_json(r));
  EXPECT_EQ(j["config"]["scale"], 2);
  EXPECT_EQ(j["config"]["modelHash"], "abc");
  ASSERT_EQ(j["images"].size(), 1u);
  EXPECT_EQ(j["images"][0]["name"], "x.png");
  EXPECT_EQ(j["images"][0]["psnrModel"], "inf");
  EXPECT_EQ(j["images"][0]["psnrAblated"], 29.5);
  EXPECT_TRUE(j["aggregate"].contains("psnrBicubic"));
}

TEST(Evaluate, EmptyDirectoryIsAnError) {
  testing::TempDir dir("empty");
  TrainConfig cfg;
  cfg.patchSize = 3;
  cfg.clusters = 1;
  const Model m = make_delta_model(cfg, Codebook{.seed = 0, .centroids = {FeatureVector{}}});
  EXPECT_THROW(evaluate(m, dir.path()), ArgumentError);
}

}  // namespace
}  // namespace phsar
