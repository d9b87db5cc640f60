#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/dataset_dir.hpp"
#include "illumkit/losses.hpp"
#include "illumkit/metrics.hpp"
#include "illumkit/png_io.hpp"
#include "illumkit/random.hpp"
#include "illumkit/report.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace illumkit::cli {
namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("illumkit_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int cli(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run(args, out_, err_);
  }
  fs::path p(const std::string& rel) const { return dir_ / rel; }
  std::string path(const std::string& rel) const { return p(rel).string(); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, SynthZeroCount) {
  EXPECT_EQ(cli({"synth", "--out", path("d"), "--count", "0"}), kSuccess);
  EXPECT_TRUE(fs::exists(p("d/manifest.json")));
  EXPECT_TRUE(list_pngs(p("d/input")).empty());
}

TEST_F(CliTest, SynthIsReproducible) {
  ASSERT_EQ(cli({"synth", "--out", path("a"), "--count", "4", "--seed", "3", "--size", "24x16"}), kSuccess);
  ASSERT_EQ(cli({"synth", "--out", path("b"), "--count", "4", "--seed", "3", "--size", "24x16", "--threads", "3"}),
            kSuccess);
  for (const char* sub : {"input", "target", "gtmap"}) {
    for (const auto& [id, file] : list_pngs(p(std::string("a/") + sub))) {
      EXPECT_EQ(slurp(file), slurp(p(std::string("b/") + sub + "/" + id + ".png")));
    }
  }
  EXPECT_EQ(slurp(p("a/manifest.json")), slurp(p("b/manifest.json")));
  EXPECT_EQ(load_image(p("a/input/00000.png")).width(), 24);
}

TEST_F(CliTest, SynthUniformMapsAreConstant) {
  ASSERT_EQ(cli({"synth", "--out", path("u"), "--count", "3", "--mode", "uniform", "--size", "16x16"}), kSuccess);
  for (const auto& [id, file] : list_pngs(p("u/gtmap"))) {
    const IlluminationMap m = load_map(file);
    for (std::size_t i = 0; i < m.pixel_count(); ++i) ASSERT_EQ(m.pixel(i), m.pixel(0)) << id;
  }
}

TEST_F(CliTest, SynthRejectsBadArguments) {
  EXPECT_EQ(cli({"synth", "--out", path("x"), "--count", "1", "--mode", "rainbow"}), kUsageError);
  EXPECT_EQ(cli({"synth", "--out", path("x"), "--count", "1", "--size", "12"}), kUsageError);
  EXPECT_EQ(cli({"synth", "--out", path("x")}), kUsageError);
  EXPECT_EQ(cli({"synth", "--out", path("x"), "--count", "1", "--source", path("nowhere")}), kRuntimeError);
  EXPECT_EQ(cli({}), kUsageError);
}

TEST_F(CliTest, EstimateUniformOnConstantImage) {
  save_image(Image(8, 8, 0.5), p("c.png"), 16);
  ASSERT_EQ(cli({"estimate", "--in", path("c.png"), "--method", "gw", "--out", path("e.json")}), kSuccess);
  EXPECT_NE(out_.str().find("c 0.577350 0.577350 0.577350"), std::string::npos) << out_.str();
  const auto doc = nlohmann::json::parse(slurp(p("e.json")));
  EXPECT_EQ(doc["method"], "gw");
  EXPECT_NEAR(doc["estimates"][0]["illuminant"][1].get<double>(), 0.57735, 1e-5);
  EXPECT_FALSE(doc["estimates"][0]["fallback"].get<bool>());
}

TEST_F(CliTest, EstimateMapOnUniformCast) {
  SplitMix64 rng(5);
  Image img(64, 48);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const double g = rng.uniform(0.1, 0.9);
    img.set_pixel(i, {0.9 * g, 0.7 * g, 0.4 * g});
  }
  fs::create_directories(p("in"));
  save_image(img, p("in/a.png"), 16);
  ASSERT_EQ(cli({"estimate", "--in", path("in"), "--method", "grid:gw", "--patch", "16", "--out", path("maps")}),
            kSuccess);
  const IlluminationMap m = load_map(p("maps/a.png"));
  const IlluminationMap truth(64, 48, {0.9, 0.7, 0.4});
  EXPECT_LT(angular_error_map(truth, m).stats.max, 2.0);
  EXPECT_EQ(cli({"estimate", "--in", path("in"), "--method", "lsac"}), kUsageError);
  EXPECT_EQ(cli({"estimate", "--in", path("in"), "--method", "magic"}), kUsageError);
  EXPECT_EQ(cli({"estimate", "--in", path("none.png"), "--method", "gw"}), kRuntimeError);
}

TEST_F(CliTest, CorrectWithVectorMapAndAuto) {
  const Image img(6, 6, 0.25);
  save_image(img, p("a.png"), 16);
  ASSERT_EQ(cli({"correct", "--in", path("a.png"), "--out", path("v.png"), "--vector", "1,1,1", "--bit-depth", "16"}),
            kSuccess);
  EXPECT_EQ(load_image(p("v.png")), load_image(p("a.png")));

  ASSERT_EQ(cli({"correct", "--in", path("a.png"), "--out", path("h.png"), "--vector", "0.5,1,1"}), kSuccess);
  EXPECT_NEAR(load_image(p("h.png")).at(0, 0, 0), 0.5, 1.0 / 255);

  save_map(IlluminationMap(6, 6, {0.5, 0.5, 0.5}), p("m.png"));
  ASSERT_EQ(cli({"correct", "--in", path("a.png"), "--out", path("m_out.png"), "--map", path("m.png")}), kSuccess);
  EXPECT_NEAR(load_image(p("m_out.png")).at(3, 3, 2), 0.5, 1.0 / 255);

  // Grey-world scene: each channel of the clean image averages 0.4.
  SplitMix64 rng(12);
  Image cast(32, 32);
  const Rgb e{0.9, 0.6, 0.45};
  for (std::size_t i = 0; i < cast.pixel_count(); i += 2) {
    Rgb a{}, b{};
    for (int c = 0; c < 3; ++c) {
      const double d = rng.uniform(-0.3, 0.3);
      a[c] = (0.4 + d) * e[c];
      b[c] = (0.4 - d) * e[c];
    }
    cast.set_pixel(i, a);
    cast.set_pixel(i + 1, b);
  }
  save_image(cast, p("cast.png"), 16);
  ASSERT_EQ(cli({"correct", "--in", path("cast.png"), "--out", path("auto.png"), "--auto", "gw", "--bit-depth", "16"}),
            kSuccess);
  const Image fixed = load_image(p("auto.png"));
  Rgb mean{};
  for (std::size_t i = 0; i < fixed.pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c) mean[c] += fixed.pixel(i)[c] / fixed.pixel_count();
  }
  EXPECT_LT(angular_error(mean, Rgb{1, 1, 1}), 0.5);
  // Brightness follows |e| / sqrt(3), the estimate's scale.
  EXPECT_NEAR(mean[1], 0.4 * std::hypot(e[0], e[1], e[2]) / std::sqrt(3.0), 1e-3);

  EXPECT_EQ(cli({"correct", "--in", path("a.png"), "--out", path("x.png")}), kUsageError);
  EXPECT_EQ(cli({"correct", "--in", path("a.png"), "--out", path("x.png"), "--vector", "1,1,1", "--auto", "gw"}),
            kUsageError);
  EXPECT_EQ(cli({"correct", "--in", path("a.png"), "--out", path("x.png"), "--vector", "1,1"}), kUsageError);
  EXPECT_EQ(cli({"correct", "--in", path("a.png"), "--out", path("x.png"), "--vector", "1,0,1"}), kRuntimeError);
  EXPECT_EQ(cli({"correct", "--in", path("a.png"), "--out", path("x.png"), "--vector", "1,1,1", "--bit-depth", "12"}),
            kUsageError);
}

TEST_F(CliTest, EvalPerfectAndDoNothing) {
  ASSERT_EQ(cli({"synth", "--out", path("d"), "--count", "5", "--seed", "8", "--size", "32x32"}), kSuccess);
  ASSERT_EQ(cli({"eval", "--pred", path("d/target"), "--gt", path("d/target"), "--input", path("d/input"), "--report",
                 path("perfect.json"), "--csv", path("perfect.csv")}),
            kSuccess);
  const EvalReport perfect = EvalReport::from_json(slurp(p("perfect.json")));
  EXPECT_EQ(perfect.angular_mode, "recovered");
  EXPECT_LT(perfect.angular.mean, 1e-6);
  EXPECT_DOUBLE_EQ(perfect.psnr.mean, 100.0);
  EXPECT_DOUBLE_EQ(perfect.ssim.mean, 1.0);
  EXPECT_EQ(perfect.per_image.size(), 5u);
  EXPECT_TRUE(fs::exists(p("perfect.csv")));

  ASSERT_EQ(cli({"eval", "--pred", path("d/input"), "--gt", path("d/target"), "--input", path("d/input"), "--gtmap",
                 path("d/gtmap"), "--report", path("none.json")}),
            kSuccess);
  EvalReport none = EvalReport::from_json(slurp(p("none.json")));
  EXPECT_EQ(none.angular_mode, "gtmap");
  EXPECT_GT(none.angular.mean, 5.0);
  const double stored = none.angular.mean;
  none.aggregate();
  EXPECT_NEAR(none.angular.mean, stored, 1e-5 * stored);

  ASSERT_EQ(cli({"eval", "--pred", path("d/input"), "--gt", path("d/target"), "--report", path("px.json"),
                 "--no-delta-e"}),
            kSuccess);
  const EvalReport px = EvalReport::from_json(slurp(p("px.json")));
  EXPECT_EQ(px.angular_mode, "pixel");
  EXPECT_FALSE(px.delta_e.has_value());
}

TEST_F(CliTest, EvalReportsMissingIds) {
  ASSERT_EQ(cli({"synth", "--out", path("d"), "--count", "3", "--size", "16x16"}), kSuccess);
  fs::remove(p("d/target/00001.png"));
  EXPECT_EQ(cli({"eval", "--pred", path("d/input"), "--gt", path("d/target"), "--report", path("r.json")}),
            kRuntimeError);
  EXPECT_NE(err_.str().find("00001"), std::string::npos);
  EXPECT_FALSE(fs::exists(p("r.json")));
  EXPECT_EQ(cli({"eval", "--pred", path("d/input"), "--gt", path("d/input"), "--gtmap", path("d/gtmap"), "--report",
                 path("r.json")}),
            kUsageError);
}

TEST_F(CliTest, Losscheck) {
  EXPECT_EQ(cli({"losscheck", "--trials", "5"}), kSuccess);
  EXPECT_EQ(cli({"losscheck", "--trials", "0"}), kSuccess);
  EXPECT_NE(out_.str().find("no trials"), std::string::npos);
  EXPECT_EQ(cli({"losscheck", "--trials", "3", "--corrupt-gradient"}), kRuntimeError);
  EXPECT_NE(err_.str().find("angular gradient check failed"), std::string::npos);
  EXPECT_EQ(cli({"losscheck", "--size", "0x3"}), kUsageError);
}

TEST_F(CliTest, LossMatchesLibraryOnFiles) {
  ASSERT_EQ(cli({"synth", "--out", path("d"), "--count", "1", "--size", "16x16"}), kSuccess);
  SplitMix64 rng(2);
  Image pred = load_image(p("d/target/00000.png"));
  for (double& v : pred.data()) v = std::clamp(v + rng.uniform(-0.05, 0.05), 0.0, 1.0);
  save_image(pred, p("pred.png"), 16);
  ASSERT_EQ(cli({"loss", "--input", path("d/input/00000.png"), "--pred", path("pred.png"), "--target",
                 path("d/target/00000.png")}),
            kSuccess);
  const Image input = load_image(p("d/input/00000.png"));
  const Image target = load_image(p("d/target/00000.png"));
  const Image pred16 = load_image(p("pred.png"));
  std::istringstream lines(out_.str());
  std::string key;
  double l1 = 0, ang = 0;
  lines >> key >> l1 >> key >> ang;
  EXPECT_NEAR(l1, l1_loss(pred16, target).value, 1e-9);
  EXPECT_NEAR(ang, angular_loss(input, pred16, target).value, 1e-7);

  ASSERT_EQ(cli({"loss", "--input", path("d/input/00000.png"), "--pred", path("pred.png"), "--target",
                 path("d/target/00000.png"), "--gtmap", path("d/gtmap/00000.png")}),
            kSuccess);
  EXPECT_EQ(cli({"loss", "--input", path("d/input/00000.png"), "--pred", path("pred.png")}), kUsageError);
}

TEST_F(CliTest, ConfigFileSuppliesDefaults) {
  std::ofstream(p("cfg.toml")) << "[synth]\ncount = 2\nsize = \"12x10\"\nseed = 4\n";
  ASSERT_EQ(cli({"--config", path("cfg.toml"), "synth", "--out", path("a")}), kSuccess);
  EXPECT_EQ(list_pngs(p("a/input")).size(), 2u);
  EXPECT_EQ(load_image(p("a/input/00000.png")).width(), 12);
  // Command-line values take precedence over the file.
  ASSERT_EQ(cli({"--config", path("cfg.toml"), "synth", "--out", path("b"), "--count", "3"}), kSuccess);
  EXPECT_EQ(list_pngs(p("b/input")).size(), 3u);
}

TEST_F(CliTest, ConfigFileFromEnvironment) {
  std::ofstream(p("env.toml")) << "[synth]\ncount = 1\nsize = \"8x8\"\n";
  ::setenv("ILLUMKIT_CONFIG", path("env.toml").c_str(), 1);
  const int code = cli({"synth", "--out", path("e")});
  ::unsetenv("ILLUMKIT_CONFIG");
  ASSERT_EQ(code, kSuccess);
  EXPECT_EQ(load_image(p("e/target/00000.png")).height(), 8);
}

TEST_F(CliTest, UnknownConfigKeyIsUsageError) {
  std::ofstream(p("bad.toml")) << "[synth]\ncount = 1\ncolour = \"red\"\n";
  EXPECT_EQ(cli({"--config", path("bad.toml"), "synth", "--out", path("x")}), kUsageError);
  EXPECT_NE(err_.str().find("valid config keys"), std::string::npos);
  EXPECT_NE(err_.str().find("synth.count"), std::string::npos);
  EXPECT_EQ(err_.str().find("corrupt-gradient"), std::string::npos);
}

TEST(DatasetDir, PairingReportsMissingIds) {
  const fs::path root = fs::temp_directory_path() / "illumkit_pairing";
  fs::remove_all(root);
  fs::create_directories(root / "a");
  fs::create_directories(root / "b");
  for (const char* name : {"a/1.png", "a/2.png", "b/2.png", "b/3.png", "b/notes.txt"}) std::ofstream(root / name) << "x";
  const PairingResult r = pair_directories({root / "a", root / "b"});
  EXPECT_EQ(r.ids, std::vector<std::string>{"2"});
  EXPECT_EQ(r.missing.size(), 2u);
  fs::remove_all(root);
}

}  // namespace
}  // namespace illumkit::cli
