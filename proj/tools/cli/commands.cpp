#include "cli/commands.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "cli/dataset_dir.hpp"
#include "illumkit/error.hpp"
#include "illumkit/estimators.hpp"
#include "illumkit/losses.hpp"
#include "illumkit/metrics.hpp"
#include "illumkit/png_io.hpp"
#include "illumkit/report.hpp"
#include "illumkit/synth.hpp"
#include "json.hpp"

namespace illumkit::cli {

namespace fs = std::filesystem;

namespace {

// Raised for bad argument combinations detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::pair<int, int> parse_size(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw UsageError("size must look like AxB, got '" + text + "'");
  try {
    std::size_t used_a = 0, used_b = 0;
    const int a = std::stoi(text.substr(0, x), &used_a);
    const int b = std::stoi(text.substr(x + 1), &used_b);
    if (used_a != x || used_b != text.size() - x - 1 || a < 1 || b < 1) throw std::invalid_argument(text);
    return {a, b};
  } catch (const std::logic_error&) {
    throw UsageError("size must look like AxB with positive integers, got '" + text + "'");
  }
}

Rgb parse_vector(const std::string& text) {
  Rgb v{};
  std::stringstream ss(text);
  std::string part;
  int i = 0;
  while (std::getline(ss, part, ',')) {
    if (i >= 3) throw UsageError("--vector takes exactly three comma-separated values");
    try {
      v[i++] = std::stod(part);
    } catch (const std::logic_error&) {
      throw UsageError("--vector component '" + part + "' is not a number");
    }
  }
  if (i != 3) throw UsageError("--vector takes exactly three comma-separated values");
  return v;
}

MethodSpec parse_method_or_usage(const std::string& name) {
  try {
    return parse_method(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

std::string fmt_rgb(const Rgb& v) { return fmt::format("{:.6f} {:.6f} {:.6f}", v[0], v[1], v[2]); }

// Input images keyed by stem: a single file or every PNG in a directory.
std::vector<std::pair<std::string, fs::path>> collect_inputs(const fs::path& in) {
  std::vector<std::pair<std::string, fs::path>> items;
  if (fs::is_directory(in)) {
    for (const auto& [id, path] : list_pngs(in)) items.emplace_back(id, path);
    if (items.empty()) throw IoError("no PNG images in " + in.string());
  } else {
    if (!fs::exists(in)) throw IoError("no such file: " + in.string());
    items.emplace_back(in.stem().string(), in);
  }
  return items;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  fs::path out;
  std::size_t count = 0;
  uint64_t seed = 0;
  std::string mode = "multi";
  int illuminants = 3;
  std::string source;
  std::string size = "64x64";
  double floor = 0.2;
  unsigned threads = 1;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SynthOptions opt;
  opt.count = a.count;
  opt.seed = a.seed;
  try {
    opt.spec.mode = parse_tint_mode(a.mode);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  opt.spec.num_illuminants = opt.spec.mode == TintMode::kUniform ? 1 : a.illuminants;
  opt.spec.min_channel_floor = a.floor;
  if (!a.source.empty()) opt.source_dir = fs::path(a.source);
  std::tie(opt.width, opt.height) = parse_size(a.size);
  opt.threads = std::max(1u, a.threads);

  const DatasetManifest manifest = emit_dataset(opt, a.out);

  double cast_sum = 0.0;
  std::size_t casts = 0;
  for (const auto& r : manifest.records) {
    for (const auto& c : r.tint.illuminants) {
      cast_sum += angular_error(c, Rgb{1.0, 1.0, 1.0});
      ++casts;
    }
  }
  fmt::print(out, "manifest: {}\n", (a.out / "manifest.json").string());
  fmt::print(out, "pairs: {}  mode: {}  illuminants: {}  seed: {}\n", manifest.records.size(),
             to_string(opt.spec.mode), opt.spec.num_illuminants, opt.seed);
  if (casts > 0) fmt::print(out, "mean illuminant angle from white: {:.3f} deg\n", cast_sum / casts);
  return kSuccess;
}

// ------------------------------------------------------------- estimate

struct EstimateArgs {
  fs::path in;
  std::string method;
  fs::path out;
  std::optional<double> p;
  std::optional<double> sigma;
  int patch = 32;
  std::string interp = "bilinear";
};

Interpolation parse_interp(const std::string& s) {
  if (s == "nearest") return Interpolation::kNearest;
  if (s == "bilinear") return Interpolation::kBilinear;
  throw UsageError("--interp must be nearest or bilinear");
}

MethodSpec configured_method(const std::string& name, const std::optional<double>& p,
                             const std::optional<double>& sigma) {
  MethodSpec m = parse_method_or_usage(name);
  if (p) m.framework.minkowski_p = *p;
  if (sigma && m.kind != MethodSpec::Kind::kLsac) m.framework.smoothing_sigma = *sigma;
  return m;
}

IlluminationMap estimate_map(const Image& img, const MethodSpec& m, const std::optional<double>& sigma, int patch,
                             Interpolation interp) {
  if (m.kind == MethodSpec::Kind::kGrid) {
    return estimate_map_grid(img, GridParams{std::min(patch, std::min(img.width(), img.height())), m.framework, interp});
  }
  LsacParams lp = LsacParams::defaults_for(img);
  if (sigma) lp.sigma = *sigma;
  return estimate_map_lsac(img, lp);
}

int cmd_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
  const MethodSpec m = configured_method(a.method, a.p, a.sigma);
  const Interpolation interp = parse_interp(a.interp);
  const bool batch = fs::is_directory(a.in);
  const auto inputs = collect_inputs(a.in);

  if (m.kind == MethodSpec::Kind::kUniform) {
    nlohmann::ordered_json doc;
    doc["method"] = m.name;
    doc["estimates"] = nlohmann::ordered_json::array();
    for (const auto& [id, path] : inputs) {
      const UniformEstimate est = estimate_uniform(load_image(path), m.framework);
      const Rgb e = est.illuminant.rgb();
      fmt::print(out, "{} {}\n", id, fmt_rgb(e));
      if (est.fallback) fmt::print(err, "warning: {}: degenerate channel, achromatic fallback\n", id);
      nlohmann::ordered_json row;
      row["id"] = id;
      row["illuminant"] = {round_sig6(e[0]), round_sig6(e[1]), round_sig6(e[2])};
      row["fallback"] = est.fallback;
      doc["estimates"].push_back(std::move(row));
    }
    if (!a.out.empty()) write_file(a.out, doc.dump(2) + "\n");
    return kSuccess;
  }

  if (a.out.empty()) throw UsageError("--out is required for map methods");
  if (batch) fs::create_directories(a.out);
  for (const auto& [id, path] : inputs) {
    const IlluminationMap map = estimate_map(load_image(path), m, a.sigma, a.patch, interp);
    const fs::path target = batch ? a.out / (id + ".png") : a.out;
    if (!batch && target.has_parent_path()) fs::create_directories(target.parent_path());
    save_map(map, target);
    fmt::print(out, "{} -> {}\n", id, target.string());
  }
  return kSuccess;
}

// -------------------------------------------------------------- correct

struct CorrectArgs {
  fs::path in;
  fs::path out;
  std::string vector;
  std::string map;
  std::string auto_method;
  int bit_depth = 8;
};

// Estimated illuminants have unit L2 length; scale them so the achromatic
// estimate becomes (1,1,1) and correction keeps overall brightness.
IlluminantVector brightness_preserving(const IlluminantVector& unit) {
  const double s = std::sqrt(3.0);
  return {unit.r * s, unit.g * s, unit.b * s};
}

int cmd_correct(const CorrectArgs& a, std::ostream& out) {
  const int given = !a.vector.empty() + !a.map.empty() + !a.auto_method.empty();
  if (given != 1) throw UsageError("exactly one of --vector, --map or --auto is required");
  const bool batch = fs::is_directory(a.in);
  const auto inputs = collect_inputs(a.in);
  if (batch) fs::create_directories(a.out);

  std::optional<Rgb> vec;
  if (!a.vector.empty()) vec = parse_vector(a.vector);
  std::optional<MethodSpec> method;
  if (!a.auto_method.empty()) method = parse_method_or_usage(a.auto_method);
  if (!a.map.empty() && batch != fs::is_directory(a.map)) {
    throw UsageError("--map must be a directory when --in is a directory (and a file otherwise)");
  }

  for (const auto& [id, path] : inputs) {
    const Image img = load_image(path);
    Image corrected;
    if (vec) {
      corrected = von_kries_correct(img, IlluminantVector::from(*vec));
    } else if (!a.map.empty()) {
      const fs::path map_path = batch ? fs::path(a.map) / (id + ".png") : fs::path(a.map);
      corrected = correct_with_map(img, load_map(map_path)).image;
    } else if (method->kind == MethodSpec::Kind::kUniform) {
      corrected = von_kries_correct(img, brightness_preserving(estimate_uniform(img, method->framework).illuminant));
    } else {
      IlluminationMap map = estimate_map(img, *method, std::nullopt, 32, Interpolation::kBilinear);
      for (double& v : map.data) v *= std::sqrt(3.0);
      corrected = correct_with_map(img, map).image;
    }
    const fs::path target = batch ? a.out / (id + ".png") : a.out;
    if (!batch && target.has_parent_path()) fs::create_directories(target.parent_path());
    save_image(corrected, target, a.bit_depth);
    fmt::print(out, "{} -> {}\n", id, target.string());
  }
  return kSuccess;
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  fs::path pred;
  fs::path gt;
  fs::path input;
  fs::path gtmap;
  fs::path report;
  fs::path csv;
  bool no_mask = false;
  bool no_delta_e = false;
  double tau_black = 1.0 / 255.0;
  double tau_sat = 254.0 / 255.0;
};

// Per-pixel color angle between two images over pixels both accept.
AngularErrorMap pixel_color_angles(const Image& gt, const Image& pred, const MaskThresholds& thr) {
  IlluminationMap a(gt.width(), gt.height()), b(gt.width(), gt.height());
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    a.set_pixel(i, gt.pixel(i));
    b.set_pixel(i, pred.pixel(i));
    const bool ok = thr.accepts(gt.pixel(i)) && thr.accepts(pred.pixel(i));
    a.valid[i] = b.valid[i] = ok ? 1 : 0;
  }
  return angular_error_map(a, b);
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  if (!a.gtmap.empty() && a.input.empty()) throw UsageError("--gtmap requires --input (e* = input / pred)");
  const MaskThresholds thr = a.no_mask ? MaskThresholds::disabled() : MaskThresholds{a.tau_black, a.tau_sat};
  thr.validate();

  std::vector<fs::path> dirs{a.pred, a.gt};
  if (!a.input.empty()) dirs.push_back(a.input);
  if (!a.gtmap.empty()) dirs.push_back(a.gtmap);
  const PairingResult pairing = pair_directories(dirs);
  if (!pairing.missing.empty()) {
    fmt::print(err, "error: directories do not pair by id; missing:\n");
    for (const auto& m : pairing.missing) fmt::print(err, "  {}\n", m);
    return kRuntimeError;
  }
  if (pairing.ids.empty()) throw IoError("no images to evaluate");

  EvalReport report;
  report.angular_mode = !a.gtmap.empty() ? "gtmap" : (!a.input.empty() ? "recovered" : "pixel");
  for (const auto& id : pairing.ids) {
    const std::string file = id + ".png";
    const Image pred = load_image(a.pred / file);
    const Image gt = load_image(a.gt / file);
    if (!pred.same_shape(gt)) throw ShapeError(id + ": pred and gt dimensions differ");

    AngularErrorMap ang;
    try {
      if (!a.gtmap.empty()) {
        const Image input = load_image(a.input / file);
        ang = angular_error_map(load_map(a.gtmap / file), recover_illumination_map(input, pred, thr));
      } else if (!a.input.empty()) {
        ang = angular_error_from_images(load_image(a.input / file), gt, pred, thr);
      } else {
        ang = pixel_color_angles(gt, pred, thr);
      }
    } catch (const EmptySampleError&) {
      throw EmptySampleError(id + ": no valid pixels for the angular error");
    }

    ImageEvalRow row;
    row.id = id;
    row.angular_mean = ang.stats.mean;
    row.valid_fraction = 1.0 - ang.invalid_fraction;
    row.psnr = psnr(pred, gt);
    row.ssim = ssim(pred, gt);
    if (!a.no_delta_e) row.delta_e = delta_e76(pred, gt).mean;
    report.per_image.push_back(std::move(row));
  }
  report.aggregate();
  write_file(a.report, report.to_json());
  if (!a.csv.empty()) write_file(a.csv, report.to_csv());

  fmt::print(out, "images: {}  angular mode: {}\n", report.per_image.size(), report.angular_mode);
  fmt::print(out, "angular error: mean {:.4f} median {:.4f} std {:.4f} max {:.4f} deg\n", report.angular.mean,
             report.angular.median, report.angular.std, report.angular.max);
  fmt::print(out, "psnr: mean {:.3f} dB  ssim: mean {:.5f}\n", report.psnr.mean, report.ssim.mean);
  if (report.delta_e) fmt::print(out, "delta E76: mean {:.4f}\n", report.delta_e->mean);
  fmt::print(out, "report: {}\n", a.report.string());
  return kSuccess;
}

// ------------------------------------------------------------ losscheck

struct LosscheckArgs {
  int trials = 100;
  std::string size = "8x8";
  uint64_t seed = 20190511;
  bool corrupt = false;
};

int cmd_losscheck(const LosscheckArgs& a, std::ostream& out, std::ostream& err) {
  if (a.trials < 0) throw UsageError("--trials must be >= 0");
  GradientCheckOptions opt;
  opt.trials = a.trials;
  std::tie(opt.height, opt.width) = parse_size(a.size);
  opt.seed = a.seed;
  opt.corrupt_gradient = a.corrupt;
  if (opt.trials == 0) {
    fmt::print(out, "no trials requested; nothing to check\n");
    return kSuccess;
  }
  const GradientCheckResult r = check_gradients(opt);
  fmt::print(out, "trials: {}  size: {}x{} (HxW)  coordinates: {}\n", r.trials, opt.height, opt.width,
             r.coordinates_checked);
  fmt::print(out, "l1      max relative error: {:.3e} (tolerance {:.0e}) {}\n", r.max_rel_l1, opt.l1_tolerance,
             r.max_rel_l1 < opt.l1_tolerance ? "ok" : "FAIL");
  fmt::print(out, "angular max relative error: {:.3e} (tolerance {:.0e}) {}\n", r.max_rel_angular,
             opt.angular_tolerance, r.max_rel_angular < opt.angular_tolerance ? "ok" : "FAIL");
  if (!r.passed) {
    if (r.max_rel_l1 >= opt.l1_tolerance) fmt::print(err, "l1 gradient check failed at {}\n", r.worst_l1);
    if (r.max_rel_angular >= opt.angular_tolerance) {
      fmt::print(err, "angular gradient check failed at {}\n", r.worst_angular);
    }
    return kRuntimeError;
  }
  return kSuccess;
}

// ----------------------------------------------------------------- loss

struct LossArgs {
  fs::path input;
  fs::path pred;
  fs::path target;
  fs::path gtmap;
};

// Loss values for one (input, pred, target) file triple, for comparison
// with other implementations of the same terms.
int cmd_loss(const LossArgs& a, std::ostream& out) {
  const Image input = load_image(a.input);
  const Image pred = load_image(a.pred);
  const Image target = load_image(a.target);
  const LossResult l1 = l1_loss(pred, target);
  const LossResult ang = a.gtmap.empty() ? angular_loss(input, pred, target)
                                         : angular_loss(input, pred, load_map(a.gtmap));
  fmt::print(out, "l1 {:.10g}\nangular {:.10g}\nvalid_fraction {:.10g}\n", l1.value, ang.value,
             ang.valid_fraction);
  return kSuccess;
}

std::string valid_config_keys(const CLI::App& app) {
  std::string keys;
  for (const CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    for (const CLI::Option* opt : sub->get_options()) {
      if (opt->get_lnames().empty() || opt->get_lnames().front() == "help" || opt->get_group().empty()) continue;
      keys += (keys.empty() ? "" : ", ") + sub->get_name() + "." + opt->get_lnames().front();
    }
  }
  return keys;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"illumkit: color constancy toolkit"};
  app.name("illumkit");
  app.require_subcommand(1);
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "Config file of key = value lines in [subcommand] sections")
      ->envname("ILLUMKIT_CONFIG");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic multi-illuminant dataset");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--count", synth.count, "Number of pairs")->required();
  s->add_option("--seed", synth.seed, "64-bit seed");
  s->add_option("--mode", synth.mode, "multi, uniform or shadow");
  s->add_option("--illuminants", synth.illuminants, "Illuminants per image (1-3)");
  s->add_option("--source", synth.source, "Directory of clean PNGs (default: procedural)");
  s->add_option("--size", synth.size, "Procedural image size WxH");
  s->add_option("--floor", synth.floor, "Minimum tint channel value");
  s->add_option("--threads", synth.threads, "Worker threads");

  EstimateArgs estimate;
  auto* e = app.add_subcommand("estimate", "Estimate an illuminant or an illumination map");
  e->add_option("--in", estimate.in, "Input PNG or directory")->required();
  e->add_option("--method", estimate.method, "gw, wp, sog, ge1, ge2, grid:<method>, lsac")->required();
  e->add_option("--out", estimate.out, "JSON (uniform) or 16-bit map PNG / directory (maps)");
  e->add_option("--p", estimate.p, "Minkowski norm override");
  e->add_option("--sigma", estimate.sigma, "Smoothing sigma (LSAC: averaging scale)");
  e->add_option("--patch", estimate.patch, "Grid patch size");
  e->add_option("--interp", estimate.interp, "Grid interpolation: nearest or bilinear");

  CorrectArgs correct;
  auto* c = app.add_subcommand("correct", "Apply von Kries correction");
  c->add_option("--in", correct.in, "Input PNG or directory")->required();
  c->add_option("--out", correct.out, "Output PNG or directory")->required();
  c->add_option("--vector", correct.vector, "Illuminant R,G,B");
  c->add_option("--map", correct.map, "16-bit illumination map PNG (directory for batch input)");
  c->add_option("--auto", correct.auto_method, "Estimate with METHOD, then correct");
  c->add_option("--bit-depth", correct.bit_depth, "Output bit depth (8 or 16)")->check(CLI::IsMember({8, 16}));

  EvalArgs eval;
  auto* v = app.add_subcommand("eval", "Evaluate predictions against ground truth");
  v->add_option("--pred", eval.pred, "Predicted images")->required();
  v->add_option("--gt", eval.gt, "Ground-truth corrected images")->required();
  v->add_option("--input", eval.input, "Input (cast) images; enables recovered-map angular error");
  v->add_option("--gtmap", eval.gtmap, "Ground-truth illumination maps; compares maps directly");
  v->add_option("--report", eval.report, "Report JSON path")->required();
  v->add_option("--csv", eval.csv, "Per-image CSV path");
  v->add_flag("--no-mask", eval.no_mask, "Disable black/saturation masking");
  v->add_flag("--no-delta-e", eval.no_delta_e, "Skip CIE76 color difference");
  v->add_option("--tau-black", eval.tau_black, "Black threshold");
  v->add_option("--tau-sat", eval.tau_sat, "Saturation threshold");

  LosscheckArgs losscheck;
  auto* l = app.add_subcommand("losscheck", "Verify loss gradients by finite differences");
  l->add_option("--trials", losscheck.trials, "Random instances");
  l->add_option("--size", losscheck.size, "Instance size HxW");
  l->add_option("--seed", losscheck.seed, "Seed");
  l->add_flag("--corrupt-gradient", losscheck.corrupt)->group("");  // negative-control hook

  LossArgs loss;
  auto* o = app.add_subcommand("loss", "Print L1 and angular loss for one file triple");
  o->add_option("--input", loss.input, "Input (cast) image")->required();
  o->add_option("--pred", loss.pred, "Predicted image")->required();
  o->add_option("--target", loss.target, "Target image")->required();
  o->add_option("--gtmap", loss.gtmap, "Ground-truth map; selects the map-based angular term");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ConfigError& ex) {
    fmt::print(err, "error: {}\nvalid config keys: {}\n", ex.what(), valid_config_keys(app));
    return kUsageError;
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*s) return cmd_synth(synth, out);
    if (*e) return cmd_estimate(estimate, out, err);
    if (*c) return cmd_correct(correct, out);
    if (*v) return cmd_eval(eval, out, err);
    if (*l) return cmd_losscheck(losscheck, out, err);
    if (*o) return cmd_loss(loss, out);
  } catch (const UsageError& ex) {
    fmt::print(err, "usage error: {}\n", ex.what());
    return kUsageError;
  } catch (const std::exception& ex) {
    fmt::print(err, "error: {}\n", ex.what());
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace illumkit::cli
