#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "phsar/error.hpp"
#include "phsar/image.hpp"
#include "test_support.hpp"

namespace phsar {
namespace {

TEST(ResizeBicubic, PreservesConstantsExactly) {
  const int sizes[][4] = {{7, 5, 13, 9}, {16, 16, 4, 4}, {9, 11, 27, 33}, {10, 3, 1, 1}, {1, 1, 6, 2}};
  for (double c : {0.0, 0.5, 0.123456789, 1.0}) {
    for (const auto& s : sizes) {
      for (bool aa : {false, true}) {
        const GrayImage out = resize_bicubic(GrayImage(s[0], s[1], c), s[2], s[3], aa);
        ASSERT_EQ(out.width(), s[2]);
        ASSERT_EQ(out.height(), s[3]);
        for (double v : out.samples()) ASSERT_EQ(v, c);
      }
    }
  }
}

TEST(ResizeBicubic, SameSizeIsIdentity) {
  const GrayImage img = testing::random_image(13, 7, 1);
  EXPECT_EQ(resize_bicubic(img, 13, 7, false), img);
}

TEST(ResizeBicubic, RampUpscaleMatchesDirectSum) {
  const std::vector<double> ramp = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
  const GrayImage out = resize_bicubic(GrayImage(4, 1, ramp), 8, 1, false);
  const auto expected = oracle::bicubic_direct(ramp, 4, 1, 8, 1, false);
  for (int x = 0; x < 8; ++x) EXPECT_NEAR(out.at(x, 0), expected[x], 1e-12) << "x=" << x;
}

TEST(ResizeBicubic, RandomResizesMatchDirectSum) {
  struct Case {
    int sw, sh, dw, dh;
    bool aa;
  } cases[] = {{9, 7, 18, 14, false}, {12, 12, 4, 4, true}, {15, 10, 5, 5, true}, {8, 8, 5, 11, true},
               {6, 9, 6, 27, false}};
  std::uint64_t seed = 10;
  for (const auto& c : cases) {
    const GrayImage img = testing::random_image(c.sw, c.sh, seed++);
    const std::vector<double> src(img.samples().begin(), img.samples().end());
    const GrayImage out = resize_bicubic(img, c.dw, c.dh, c.aa);
    const auto expected = oracle::bicubic_direct(src, c.sw, c.sh, c.dw, c.dh, c.aa);
    for (std::size_t i = 0; i < expected.size(); ++i) ASSERT_NEAR(out.samples()[i], expected[i], 1e-12);
  }
}

TEST(ResizeBicubic, SeparableConsistency) {
  // Mid-range input keeps the intermediate away from the clamp.
  const GrayImage img = testing::random_image(11, 9, 3, 0.3, 0.7);
  for (bool aa : {false, true}) {
    const GrayImage direct = resize_bicubic(img, 23, 4, aa);
    const GrayImage twoStep = resize_bicubic(resize_bicubic(img, 23, 9, aa), 23, 4, aa);
    for (std::size_t i = 0; i < direct.size(); ++i) ASSERT_NEAR(direct.samples()[i], twoStep.samples()[i], 1e-12);
  }
}

TEST(ResizeBicubic, OutputClampedToUnitRange) {
  GrayImage step(8, 1, 0.0);
  for (int x = 4; x < 8; ++x) step.at(x, 0) = 1.0;
  const GrayImage out = resize_bicubic(step, 32, 1, false);
  for (double v : out.samples()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(ResizeBicubic, RejectsZeroDimension) {
  const GrayImage img(4, 4, 0.5);
  EXPECT_THROW(resize_bicubic(img, 0, 4, false), ArgumentError);
  EXPECT_THROW(resize_bicubic(img, 4, 0, true), ArgumentError);
}

TEST(ExtractPatch, SinglePixelImageReplicates) {
  const Patch p = extract_patch(GrayImage(1, 1, 0.37), 0, 0, 3);
  ASSERT_EQ(p.size(), 9u);
  for (double v : p.values) EXPECT_EQ(v, 0.37);
}

TEST(ExtractPatch, InteriorPixelReadsNeighbours) {
  GrayImage ramp(5, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) ramp.at(x, y) = 5 * y + x;
  const Patch p = extract_patch(ramp, 2, 3, 3);
  const std::vector<double> expected = {11, 12, 13, 16, 17, 18, 21, 22, 23};
  EXPECT_EQ(p.values, expected);
  EXPECT_EQ(p.center(), 17);
}

TEST(ExtractPatch, CornerUsesClampedCoordinates) {
  const GrayImage img(2, 2, std::vector<double>{1, 2, 3, 4});
  // Enumerate clamp(cx+dx), clamp(cy+dy) for the corner (0, 0).
  std::vector<double> expected;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) expected.push_back(img.at(std::clamp(dx, 0, 1), std::clamp(dy, 0, 1)));
  EXPECT_EQ(expected, (std::vector<double>{1, 1, 2, 1, 1, 2, 3, 3, 4}));
  EXPECT_EQ(extract_patch(img, 0, 0, 3).values, expected);
}

TEST(ExtractPatch, ConstantImageGivesConstantPatchEverywhere) {
  const GrayImage img(6, 4, 0.25);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x)
      for (double v : extract_patch(img, x, y, 5).values) ASSERT_EQ(v, 0.25);
}

TEST(ExtractPatch, RejectsEvenSizeAndOutOfRangeCentre) {
  const GrayImage img(4, 4, 0.5);
  EXPECT_THROW(extract_patch(img, 1, 1, 4), ArgumentError);
  EXPECT_THROW(extract_patch(img, 4, 1, 3), ArgumentError);
  EXPECT_THROW(extract_patch(img, 0, -1, 3), ArgumentError);
}

TEST(GrayImage, RejectsBadDimensions) {
  EXPECT_THROW(GrayImage(0, 3), ArgumentError);
  EXPECT_THROW(GrayImage(2, 2, std::vector<double>{1, 2, 3}), ArgumentError);
}

}  // namespace
}  // namespace phsar
