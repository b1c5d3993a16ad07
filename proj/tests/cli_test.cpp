#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "phsar/image.hpp"
#include "phsar/model.hpp"
#include "test_support.hpp"

namespace phsar {
namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("cli");
    std::filesystem::create_directories(*dir_ / "hr");
    for (std::uint64_t s = 0; s < 4; ++s) {
      save_image(testing::textured_image(48, 48, s, 0.05), *dir_ / "hr" / ("img" + std::to_string(s) + ".png"));
    }
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }

  static RunResult run(const std::string& args) {
    const auto out = *dir_ / "stdout.txt";
    const auto err = *dir_ / "stderr.txt";
    const std::string cmd = std::string(PHSAR_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  static std::string path(const std::string& name) { return (*dir_ / name).string(); }

  static std::string small_train(const std::string& extra = "") {
    return "train --hr-dir " + path("hr") + " --patch 5 --clusters 4 --min-samples 20 " + extra;
  }

  static inline testing::TempDir* dir_ = nullptr;
};

TEST_F(Cli, TrainIsDeterministicAcrossThreadCounts) {
  const RunResult a = run(small_train("--out " + path("a.phsar") + " --threads 1"));
  ASSERT_EQ(a.code, 0) << a.err;
  const RunResult b = run(small_train("--out " + path("b.phsar") + " --threads 3"));
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(path("a.phsar")), slurp(path("b.phsar")));
  EXPECT_NE(a.out.find("fallback filters:"), std::string::npos);
  EXPECT_NE(a.out.find("buckets: 16"), std::string::npos);
}

TEST_F(Cli, MissingDirectoryExitsWithIoCode) {
  const RunResult r = run("train --hr-dir " + path("nope") + " --out " + path("x.phsar"));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find(path("nope")), std::string::npos) << r.err;
}

TEST_F(Cli, EvenPatchSizeNamesTheFlag) {
  const RunResult r = run("train --hr-dir " + path("hr") + " --out " + path("x.phsar") + " --patch 8");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--patch"), std::string::npos) << r.err;
  EXPECT_FALSE(std::filesystem::exists(path("x.phsar")));
}

TEST_F(Cli, UnknownFlagAndMissingSubcommandAreArgumentErrors) {
  EXPECT_EQ(run("train --bogus 1").code, 2);
  EXPECT_EQ(run("").code, 2);
}

TEST_F(Cli, UpscaleProducesScaledImage) {
  ASSERT_EQ(run(small_train("--scale 3 --out " + path("s3.phsar"))).code, 0);
  save_image(testing::textured_image(64, 64, 11), path("lr.png"));
  const RunResult r = run("upscale --model " + path("s3.phsar") + " --input " + path("lr.png") + " --output " +
                          path("hr_out.png"));
  ASSERT_EQ(r.code, 0) << r.err;
  const GrayImage out = load_image(path("hr_out.png"));
  EXPECT_EQ(out.width(), 192);
  EXPECT_EQ(out.height(), 192);
}

TEST_F(Cli, EvalWithAblationWritesReport) {
  ASSERT_EQ(run(small_train("--no-pst --out " + path("nopst.phsar"))).code, 0);
  const RunResult r = run("eval --model " + path("nopst.phsar") + " --hr-dir " + path("hr") + " --ablate --report " +
                          path("report.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string report = slurp(path("report.json"));
  EXPECT_NE(report.find("\"psnrAblated\""), std::string::npos);
  EXPECT_NE(report.find("\"psnrBicubic\""), std::string::npos);
  EXPECT_NE(report.find("img3.png"), std::string::npos);
}

TEST_F(Cli, AblateRejectsPstModel) {
  ASSERT_EQ(run(small_train("--out " + path("pst.phsar"))).code, 0);
  const RunResult r = run("eval --model " + path("pst.phsar") + " --hr-dir " + path("hr") + " --ablate");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--no-pst"), std::string::npos) << r.err;
}

TEST_F(Cli, InspectReportsTruncation) {
  ASSERT_EQ(run(small_train("--out " + path("full.phsar"))).code, 0);
  const std::string bytes = slurp(path("full.phsar"));
  {
    std::ofstream out(path("cut.phsar"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  const RunResult r = run("inspect --model " + path("cut.phsar"));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("unexpected end of file"), std::string::npos) << r.err;
  const RunResult ok = run("inspect --model " + path("full.phsar"));
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.out.find("patch size: 5"), std::string::npos);
}

TEST_F(Cli, PstWritesUnitRangeImage) {
  save_image(testing::textured_image(40, 30, 5), path("pst_in.png"));
  const RunResult r = run("pst --input " + path("pst_in.png") + " --output " + path("pst_out.pgm"));
  ASSERT_EQ(r.code, 0) << r.err;
  const GrayImage out = load_image(path("pst_out.pgm"));
  EXPECT_EQ(out.width(), 40);
  EXPECT_EQ(out.height(), 30);
  EXPECT_EQ(*std::min_element(out.samples().begin(), out.samples().end()), 0.0);
  EXPECT_EQ(*std::max_element(out.samples().begin(), out.samples().end()), 1.0);
  EXPECT_EQ(run("pst --input " + path("pst_in.png") + " --output " + path("p.png") + " --pst-w -1").code, 2);
}

TEST_F(Cli, ConfigFileSuppliesDefaultsAndFlagsOverride) {
  {
    std::ofstream cfg(path("train.cfg"));
    cfg << "# small model\npatch = 7\nclusters = 3\nmin-samples = 20\n";
  }
  ASSERT_EQ(run("train --config " + path("train.cfg") + " --hr-dir " + path("hr") + " --clusters 2 --out " +
                path("cfg.phsar"))
                .code,
            0);
  const Model m = load_model(path("cfg.phsar"));
  EXPECT_EQ(m.config.patchSize, 7);
  EXPECT_EQ(m.config.clusters, 2u);
  EXPECT_EQ(m.config.minSamples, 20);
}

}  // namespace
}  // namespace phsar
