// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "illumkit/estimators.hpp"
#include "illumkit/image.hpp"
#include "illumkit/losses.hpp"
#include "illumkit/metrics.hpp"
#include "illumkit/png_io.hpp"
#include "illumkit/random.hpp"
#include "illumkit/synth.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace illumkit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_s;  // 0: no runtime limit
  std::function<Outcome()> check;
};

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) : path_(fs::temp_directory_path() / ("illumkit_acceptance_" + tag)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Relative path -> contents for every regular file under root.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files[fs::relative(entry.path(), root).string()] = slurp(entry.path());
  }
  return files;
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

Outcome angular_exactness() {
  struct Case {
    Rgb a, b;
    double expected;
  };
  const Case cases[] = {{{1, 1, 1}, {1, 1, 1}, 0.0},
                        {{1, 0, 0}, {0, 1, 0}, 90.0},
                        {{1, 1, 0}, {1, 0, 0}, 45.0},
                        {{0.6, 0.4, 0.9}, {3.7 * 0.6, 3.7 * 0.4, 3.7 * 0.9}, 0.0}};
  double worst_example = 0;
  for (const auto& c : cases) worst_example = std::max(worst_example, std::abs(angular_error(c.a, c.b) - c.expected));

  SplitMix64 rng(2024);
  double worst_sym = 0, worst_scale = 0;
  for (int i = 0; i < 10000; ++i) {
    const Rgb u{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Rgb v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double k = std::exp(rng.uniform(-5, 5));
    const double a = angular_error(u, v);
    worst_sym = std::max(worst_sym, std::abs(a - angular_error(v, u)));
    worst_scale = std::max(worst_scale, std::abs(a - angular_error(Rgb{k * u[0], k * u[1], k * u[2]}, v)));
  }
  return {worst_example < 1e-9 && worst_sym < 1e-9 && worst_scale < 1e-9,
          fmt::format("examples max dev {:.2e} deg; 1e4 pairs: symmetry {:.2e}, scale {:.2e}", worst_example, worst_sym,
                      worst_scale)};
}

Outcome von_kries_round_trip() {
  SplitMix64 rng(77);
  double worst = 0;
  for (int n = 0; n < 100; ++n) {
    Image img(64, 64);
    for (double& v : img.data()) v = rng.uniform();
    const IlluminantVector e{rng.uniform(0.1, 10), rng.uniform(0.1, 10), rng.uniform(0.1, 10)};
    const Image back = von_kries_correct(apply_cast(img, e), e);
    for (std::size_t k = 0; k < img.data().size(); ++k) worst = std::max(worst, std::abs(back.data()[k] - img.data()[k]));
  }
  return {worst < 1e-6, fmt::format("100 images 64x64, max per-channel error {:.2e}", worst)};
}

Outcome estimator_oracles() {
  struct Preset {
    const char* name;
    GreyFrameworkParams params;
  };
  const Preset presets[] = {{"gw", GreyFrameworkParams::grey_world()},
                            {"wp", GreyFrameworkParams::white_patch()},
                            {"sog", GreyFrameworkParams::shades_of_gray()},
                            {"ge1", GreyFrameworkParams::grey_edge1()},
                            {"ge2", GreyFrameworkParams::grey_edge2()}};
  double worst_comp = 0, worst_angle = 0;
  for (uint32_t seed = 1; seed <= 20; ++seed) {
    const Image img = oracle::lcg_image(32, 32, seed, 0.02, 1.0);
    for (const auto& p : presets) {
      const Rgb got = estimate_uniform(img, p.params).illuminant.rgb();
      Rgb ref = oracle::grey_framework(img, p.params.deriv_order, p.params.minkowski_p, p.params.smoothing_sigma);
      const double n = std::sqrt(ref[0] * ref[0] + ref[1] * ref[1] + ref[2] * ref[2]);
      for (int c = 0; c < 3; ++c) worst_comp = std::max(worst_comp, std::abs(got[c] - ref[c] / n));
      worst_angle = std::max(worst_angle, angular_error(got, ref));
    }
  }

  // p = 256 approaches the max on images whose channel maxima are unique.
  double worst_sog_wp = 0;
  for (uint32_t seed = 100; seed < 120; ++seed) {
    Image img = oracle::lcg_image(32, 32, seed, 0.0, 0.8);
    // Each channel peaks once, at a different pixel.
    img.at(seed % 32, 3, 0) = 0.95;
    img.at(7, seed % 32, 1) = 0.9;
    img.at(20, 29, 2) = 0.85;
    const Rgb sog = estimate_uniform(img, {0, 256.0, 0.0}).illuminant.rgb();
    const Rgb wp = estimate_uniform(img, GreyFrameworkParams::white_patch()).illuminant.rgb();
    worst_sog_wp = std::max(worst_sog_wp, angular_error(sog, wp));
  }
  return {worst_comp < 1e-9 && worst_angle <= 1e-7 && worst_sog_wp < 0.2,
          fmt::format("20 images x 5 presets: max component dev {:.2e}, angle {:.2e} deg; SoG(256) vs WP {:.2e} deg",
                      worst_comp, worst_angle, worst_sog_wp)};
}

Outcome multi_illuminant_recovery() {
  ScratchDir dir("recovery");
  SynthOptions opt;
  opt.count = 100;
  opt.seed = 20190511;
  const PairSource source(opt);

  double float_angle = 0, float_psnr = 1e9;
  for (std::size_t i = 0; i < opt.count; ++i) {
    const SyntheticPair p = source.make(i);
    const Image corrected = correct_with_map(p.tinted, p.map).image;
    float_angle += angular_error_from_images(p.tinted, p.clean, corrected).stats.mean / opt.count;
    float_psnr = std::min(float_psnr, psnr(corrected, p.clean));
  }

  emit_dataset(opt, dir.path());
  double masked = 0, unmasked = 0;
  for (std::size_t i = 0; i < opt.count; ++i) {
    const std::string name = pair_id(i) + ".png";
    const Image input = load_image(dir.path() / "input" / name);
    const Image target = load_image(dir.path() / "target" / name);
    const IlluminationMap gt = load_map(dir.path() / "gtmap" / name);
    masked += angular_error_map(gt, recover_illumination_map(input, target)).stats.mean / opt.count;
    unmasked += angular_error_map(gt, recover_illumination_map(input, target, MaskThresholds::disabled())).stats.mean /
                opt.count;
  }
  return {float_angle < 0.1 && float_psnr >= 60 && masked < 1.5 && unmasked > masked,
          fmt::format("float: mean {:.2e} deg, min PSNR {:.1f} dB; 8-bit: masked {:.4f} deg, unmasked {:.4f} deg",
                      float_angle, float_psnr, masked, unmasked)};
}

Outcome grid_two_tint() {
  // Grey-world-balanced texture under (2,1,1) on the left and (1,1,2) on the right.
  const int w = 128, h = 64, patch = 16;
  SplitMix64 rng(31);
  Image scene(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; x += 2) {
      const double g = rng.uniform(0.3, 0.7);
      for (int c = 0; c < 3; ++c) {
        const double d = rng.uniform(-0.25, 0.25);
        scene.at(x, y, c) = g + d;
        scene.at(x + 1, y, c) = g - d;
      }
    }
  }
  IlluminationMap truth(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) truth.set_pixel(y * w + x, x < w / 2 ? Rgb{2, 1, 1} : Rgb{1, 1, 2});
  const Image cast = apply_cast_map(scene, truth);

  std::string detail;
  bool pass = true;
  for (const auto interp : {Interpolation::kNearest, Interpolation::kBilinear}) {
    const IlluminationMap map = estimate_map_grid(cast, {patch, GreyFrameworkParams::grey_world(), interp});
    double worst = 0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (std::abs(x + 0.5 - w / 2.0) <= patch) continue;
        worst = std::max(worst, angular_error(map.pixel(y * w + x), truth.pixel(y * w + x)));
      }
    }
    pass = pass && worst < 0.5;
    detail += fmt::format("{}{}: max {:.3f} deg", detail.empty() ? "" : "; ",
                          interp == Interpolation::kNearest ? "nearest" : "bilinear", worst);
  }
  return {pass, detail + fmt::format(" (patch {}, >{} px from seam)", patch, patch)};
}

Outcome gradient_checks() {
  const GradientCheckResult r = check_gradients(GradientCheckOptions{});
  const int code = cli({"losscheck"});
  return {r.passed && r.max_rel_l1 < 1e-6 && r.max_rel_angular < 1e-4 && code == 0,
          fmt::format("100 trials 8x8: l1 {:.2e}, angular {:.2e}; losscheck exit {}", r.max_rel_l1, r.max_rel_angular,
                      code)};
}

Outcome determinism() {
  ScratchDir dir("determinism");
  const auto run = [&](const std::string& sub, const std::string& threads) {
    return cli({"synth", "--out", (dir.path() / sub).string(), "--count", "40", "--seed", "99", "--threads", threads});
  };
  if (run("a", "1") != 0 || run("b", "1") != 0 || run("c", "4") != 0) return {false, "synth failed"};
  const auto a = snapshot(dir.path() / "a");
  const bool rerun = a == snapshot(dir.path() / "b");
  const bool parallel = a == snapshot(dir.path() / "c");
  return {rerun && parallel && a.size() == 121,
          fmt::format("{} files; rerun identical: {}; 1 vs 4 threads identical: {}", a.size(), rerun, parallel)};
}

Outcome baseline_ordering() {
  ScratchDir dir("baselines");
  SynthOptions opt;
  opt.count = 500;
  opt.seed = 11;
  opt.spec.mode = TintMode::kUniform;
  opt.spec.num_illuminants = 1;
  emit_dataset(opt, dir.path());

  const std::vector<std::string> methods{"gw", "wp", "sog", "ge1", "ge2", "grid:gw", "lsac"};
  std::map<std::string, double> mean;
  double do_nothing = 0;
  for (std::size_t i = 0; i < opt.count; ++i) {
    const std::string name = pair_id(i) + ".png";
    const Image input = load_image(dir.path() / "input" / name);
    const IlluminationMap gt = load_map(dir.path() / "gtmap" / name);
    const Rgb e = gt.pixel(0);
    do_nothing += angular_error(Rgb{1, 1, 1}, e) / opt.count;
    for (const auto& m : methods) {
      const MethodSpec spec = parse_method(m);
      double err = 0;
      if (spec.kind == MethodSpec::Kind::kUniform) {
        err = angular_error(estimate_uniform(input, spec.framework).illuminant.rgb(), e);
      } else if (spec.kind == MethodSpec::Kind::kGrid) {
        err = angular_error_map(gt, estimate_map_grid(input, {32, spec.framework, Interpolation::kBilinear})).stats.mean;
      } else {
        err = angular_error_map(gt, estimate_map_lsac(input, LsacParams::defaults_for(input))).stats.mean;
      }
      mean[m] += err / opt.count;
    }
  }
  bool pass = true;
  std::string detail = fmt::format("do-nothing {:.2f}", do_nothing);
  for (const auto& m : methods) {
    pass = pass && mean[m] < do_nothing;
    detail += fmt::format(", {} {:.2f}", m, mean[m]);
  }
  return {pass, detail + " (mean deg, 500 pairs)"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"angular-metric exactness", 1.0, angular_exactness},
      {"von Kries round trip", 5.0, von_kries_round_trip},
      {"estimator oracles", 0.0, estimator_oracles},
      {"multi-illuminant recovery", 0.0, multi_illuminant_recovery},
      {"grid estimator two-tint scene", 0.0, grid_two_tint},
      {"gradient checks", 10.0, gradient_checks},
      {"synthesis determinism", 0.0, determinism},
      {"baseline ordering", 0.0, baseline_ordering},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt::format("{:.2f} s", secs);
    if (c.budget_s > 0) {
      timing += fmt::format(" / limit {:.0f} s", c.budget_s);
      if (secs >= c.budget_s) {
        o.pass = false;
        o.detail += "; over time limit";
      }
    }
    fmt::print("{} {} | {} | {}\n", o.pass ? "PASS" : "FAIL", c.name, o.detail, timing);
    failures += o.pass ? 0 : 1;
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
