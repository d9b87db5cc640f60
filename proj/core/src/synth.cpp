#include "illumkit/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "illumkit/error.hpp"
#include "illumkit/png_io.hpp"
#include "json.hpp"

namespace illumkit {

namespace {

using Json = nlohmann::ordered_json;

bool ordered_range(const std::array<double, 2>& r) { return std::isfinite(r[0]) && std::isfinite(r[1]) && r[0] <= r[1]; }

Rgb max_channel_one(const Rgb& v) {
  const double m = std::max({v[0], v[1], v[2]});
  return {v[0] / m, v[1] / m, v[2] / m};
}

Rgb sample_chromaticity(const TintSpec& spec, SplitMix64& rng) {
  const double hue = rng.uniform(spec.hue_range[0], spec.hue_range[1]);
  const double sat = rng.uniform(spec.saturation_range[0], spec.saturation_range[1]);
  return hsv_to_rgb(hue, sat);
}

double squared_distance(double x, double y, const std::array<double, 2>& c) {
  return (x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]);
}

// Smooth lattice noise in [0,1] with the given cell size in pixels.
std::vector<double> value_noise(int w, int h, double cell, SplitMix64& rng) {
  const int gw = static_cast<int>(std::ceil(w / cell)) + 2;
  const int gh = static_cast<int>(std::ceil(h / cell)) + 2;
  std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
  for (double& v : lattice) v = rng.uniform();
  auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    const double fy = y / cell;
    const int iy = static_cast<int>(fy);
    const double ty = smooth(fy - iy);
    for (int x = 0; x < w; ++x) {
      const double fx = x / cell;
      const int ix = static_cast<int>(fx);
      const double tx = smooth(fx - ix);
      auto at = [&](int gx, int gy) { return lattice[static_cast<std::size_t>(gy) * gw + gx]; };
      const double top = (1 - tx) * at(ix, iy) + tx * at(ix + 1, iy);
      const double bottom = (1 - tx) * at(ix, iy + 1) + tx * at(ix + 1, iy + 1);
      out[static_cast<std::size_t>(y) * w + x] = (1 - ty) * top + ty * bottom;
    }
  }
  return out;
}

std::vector<double> fractal_noise(int w, int h, double base_cell, int octaves, SplitMix64& rng) {
  std::vector<double> acc(static_cast<std::size_t>(w) * h, 0.0);
  double amplitude = 1.0, total = 0.0, cell = base_cell;
  for (int o = 0; o < octaves; ++o) {
    const auto layer = value_noise(w, h, std::max(cell, 1.0), rng);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += amplitude * layer[i];
    total += amplitude;
    amplitude *= 0.5;
    cell *= 0.5;
  }
  for (double& v : acc) v /= total;
  return acc;
}

Json rgb_json(const Rgb& v) { return Json::array({v[0], v[1], v[2]}); }
Rgb rgb_from(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
Json range_json(const std::array<double, 2>& r) { return Json::array({r[0], r[1]}); }
std::array<double, 2> range_from(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace

std::string to_string(TintMode mode) {
  switch (mode) {
    case TintMode::kMulti: return "multi";
    case TintMode::kUniform: return "uniform";
    case TintMode::kShadow: return "shadow";
  }
  return "multi";
}

TintMode parse_tint_mode(const std::string& name) {
  if (name == "multi") return TintMode::kMulti;
  if (name == "uniform") return TintMode::kUniform;
  if (name == "shadow") return TintMode::kShadow;
  throw std::invalid_argument("unknown tint mode '" + name + "' (expected multi, uniform or shadow)");
}

void TintSpec::validate() const {
  if (num_illuminants < 1 || num_illuminants > 3) throw DomainError("num_illuminants must be in [1,3]");
  if (!ordered_range(hue_range)) throw DomainError("hue range must be an ordered interval");
  if (!ordered_range(saturation_range) || saturation_range[0] < 0.0 || saturation_range[1] > 1.0) {
    throw DomainError("saturation range must be an ordered interval within [0,1]");
  }
  if (!ordered_range(sigma_range) || !(sigma_range[0] > 0.0)) {
    throw DomainError("sigma range must be an ordered interval of positive fractions");
  }
  if (!(min_channel_floor > 0.0 && min_channel_floor < 1.0)) throw DomainError("min_channel_floor must be in (0,1)");
  if (forced_chromaticity) {
    const Rgb& c = *forced_chromaticity;
    if (!(c[0] >= 0 && c[1] >= 0 && c[2] >= 0) || !(std::max({c[0], c[1], c[2]}) > 0)) {
      throw DomainError("forced chromaticity must be nonnegative and nonzero");
    }
  }
}

Rgb hsv_to_rgb(double hue_deg, double saturation, double value) {
  double h = std::fmod(hue_deg, 360.0);
  if (h < 0) h += 360.0;
  const double c = value * saturation;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  Rgb rgb{};
  switch (static_cast<int>(hp)) {
    case 0: rgb = {c, x, 0}; break;
    case 1: rgb = {x, c, 0}; break;
    case 2: rgb = {0, c, x}; break;
    case 3: rgb = {0, x, c}; break;
    case 4: rgb = {x, 0, c}; break;
    default: rgb = {c, 0, x}; break;
  }
  const double m = value - c;
  return {rgb[0] + m, rgb[1] + m, rgb[2] + m};
}

TintMap gen_tint_map(int width, int height, const TintSpec& spec, SplitMix64& rng) {
  if (width < 1 || height < 1) throw ShapeError("tint map dimensions must be positive");
  spec.validate();
  TintMap out{IlluminationMap(width, height), {}};
  TintRecord& rec = out.record;
  const double extent = std::max(width, height);
  const double floor = spec.min_channel_floor;
  auto clamp_floor = [floor](Rgb v) {
    for (double& c : v) c = std::max(c, floor);
    return v;
  };

  if (spec.mode == TintMode::kUniform) {
    const Rgb c = max_channel_one(spec.forced_chromaticity ? *spec.forced_chromaticity : sample_chromaticity(spec, rng));
    rec.illuminants.push_back(c);
    const Rgb e = clamp_floor(c);
    for (std::size_t i = 0; i < out.map.pixel_count(); ++i) out.map.set_pixel(i, e);
    return out;
  }

  const int k = spec.num_illuminants;
  for (int i = 0; i < k; ++i) {
    if (spec.mode == TintMode::kMulti) rec.illuminants.push_back(max_channel_one(sample_chromaticity(spec, rng)));
    rec.centers.push_back({rng.uniform(0.0, width), rng.uniform(0.0, height)});
    rec.sigmas.push_back(rng.uniform(spec.sigma_range[0], spec.sigma_range[1]) * extent);
  }

  if (spec.mode == TintMode::kShadow) {
    rec.shadow_strength = rng.uniform(0.3, 0.7);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double m = 0.0;
        for (int i = 0; i < k; ++i) {
          m = std::max(m, std::exp(-squared_distance(x, y, rec.centers[i]) / (2 * rec.sigmas[i] * rec.sigmas[i])));
        }
        const double e = std::max(1.0 - rec.shadow_strength * m, floor);
        out.map.set_pixel(static_cast<std::size_t>(y) * width + x, {e, e, e});
      }
    }
    return out;
  }

  std::vector<double> logw(k);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int i = 0; i < k; ++i) {
        logw[i] = -squared_distance(x, y, rec.centers[i]) / (2 * rec.sigmas[i] * rec.sigmas[i]);
      }
      // Shift by the largest log-weight so distant blobs cannot underflow
      // every weight to zero.
      const double top = *std::max_element(logw.begin(), logw.end());
      Rgb e{0, 0, 0};
      double wsum = 0.0;
      for (int i = 0; i < k; ++i) {
        const double w = std::exp(logw[i] - top);
        wsum += w;
        for (int c = 0; c < kChannels; ++c) e[c] += w * rec.illuminants[i][c];
      }
      for (double& c : e) c /= wsum;
      out.map.set_pixel(static_cast<std::size_t>(y) * width + x, clamp_floor(max_channel_one(e)));
    }
  }
  return out;
}

Image synthesize_pair(const Image& clean, const IlluminationMap& map) {
  if (!map.matches(clean)) throw ShapeError("synthesize_pair: map and image dimensions differ");
  return apply_cast_map(clean, map);
}

Image procedural_texture(int width, int height, SplitMix64& rng) {
  constexpr double kHighlight = 0.97;
  if (width < 1 || height < 1) throw ShapeError("texture dimensions must be positive");
  const double base = std::max(width, height) / 2.0;
  const auto shading = fractal_noise(width, height, base, 4, rng);
  std::array<std::vector<double>, 3> chroma;
  for (auto& ch : chroma) ch = fractal_noise(width, height, base / 2.0, 3, rng);

  Image img(width, height);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    // Contrast stretch pushes the lower tail into deep shadow; highlights
    // stop below the 8-bit saturation rail.
    const double l = std::clamp(0.5 + 2.4 * (shading[i] - 0.5), 0.0, 1.3);
    Rgb px{};
    for (int c = 0; c < kChannels; ++c) px[c] = std::clamp(l * (0.35 + 1.3 * chroma[c][i]), 0.0, kHighlight);
    img.set_pixel(i, px);
  }
  return img;
}

std::string pair_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05zu", index);
  return buf;
}

PairSource::PairSource(const SynthOptions& options) : options_(options) {
  options_.spec.validate();
  if (options_.source_dir) {
    std::vector<std::filesystem::path> files;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(*options_.source_dir, ec)) {
      if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
    }
    if (ec) throw IoError("cannot read source directory " + options_.source_dir->string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("source directory has no PNG images: " + options_.source_dir->string());
    for (const auto& f : files) sources_.emplace_back(f.filename().string(), load_image(f));
  } else if (options_.width < 1 || options_.height < 1) {
    throw ShapeError("procedural size must be positive");
  }
}

SyntheticPair PairSource::make(std::size_t index) const {
  SplitMix64 rng(SplitMix64::stream_seed(options_.seed, index));
  SyntheticPair pair;
  pair.record.id = pair_id(index);
  if (sources_.empty()) {
    pair.clean = procedural_texture(options_.width, options_.height, rng);
    pair.record.source = "procedural";
  } else {
    const auto& [name, img] = sources_[index % sources_.size()];
    pair.clean = clipped(img);
    pair.record.source = name;
  }
  pair.record.width = pair.clean.width();
  pair.record.height = pair.clean.height();
  TintMap tint = gen_tint_map(pair.clean.width(), pair.clean.height(), options_.spec, rng);
  pair.map = std::move(tint.map);
  pair.record.tint = std::move(tint.record);
  pair.tinted = synthesize_pair(pair.clean, pair.map);
  return pair;
}

std::string DatasetManifest::to_json() const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = seed;
  j["source"] = source;
  j["width"] = width;
  j["height"] = height;
  Json s;
  s["mode"] = illumkit::to_string(spec.mode);
  s["num_illuminants"] = spec.num_illuminants;
  s["hue_range"] = range_json(spec.hue_range);
  s["saturation_range"] = range_json(spec.saturation_range);
  s["sigma_range"] = range_json(spec.sigma_range);
  s["min_channel_floor"] = spec.min_channel_floor;
  s["forced_chromaticity"] = spec.forced_chromaticity ? rgb_json(*spec.forced_chromaticity) : Json(nullptr);
  j["spec"] = std::move(s);
  j["count"] = records.size();
  Json rows = Json::array();
  for (const auto& r : records) {
    Json row;
    row["id"] = r.id;
    row["source"] = r.source;
    row["width"] = r.width;
    row["height"] = r.height;
    Json ill = Json::array(), centers = Json::array();
    for (const auto& c : r.tint.illuminants) ill.push_back(rgb_json(c));
    for (const auto& c : r.tint.centers) centers.push_back(range_json(c));
    row["illuminants"] = std::move(ill);
    row["centers"] = std::move(centers);
    row["sigmas"] = r.tint.sigmas;
    row["shadow_strength"] = r.tint.shadow_strength;
    rows.push_back(std::move(row));
  }
  j["records"] = std::move(rows);
  return j.dump(2) + "\n";
}

DatasetManifest DatasetManifest::from_json(const std::string& text) {
  DatasetManifest m;
  try {
    const Json j = Json::parse(text);
    if (j.at("schema_version").get<int>() != kSchemaVersion) throw std::runtime_error("unsupported manifest schema_version");
    m.seed = j.at("seed").get<uint64_t>();
    m.source = j.at("source").get<std::string>();
    m.width = j.at("width").get<int>();
    m.height = j.at("height").get<int>();
    const Json& s = j.at("spec");
    m.spec.mode = parse_tint_mode(s.at("mode").get<std::string>());
    m.spec.num_illuminants = s.at("num_illuminants").get<int>();
    m.spec.hue_range = range_from(s.at("hue_range"));
    m.spec.saturation_range = range_from(s.at("saturation_range"));
    m.spec.sigma_range = range_from(s.at("sigma_range"));
    m.spec.min_channel_floor = s.at("min_channel_floor").get<double>();
    if (!s.at("forced_chromaticity").is_null()) m.spec.forced_chromaticity = rgb_from(s.at("forced_chromaticity"));
    for (const auto& row : j.at("records")) {
      PairRecord r;
      r.id = row.at("id").get<std::string>();
      r.source = row.at("source").get<std::string>();
      r.width = row.at("width").get<int>();
      r.height = row.at("height").get<int>();
      for (const auto& c : row.at("illuminants")) r.tint.illuminants.push_back(rgb_from(c));
      for (const auto& c : row.at("centers")) r.tint.centers.push_back(range_from(c));
      r.tint.sigmas = row.at("sigmas").get<std::vector<double>>();
      r.tint.shadow_strength = row.at("shadow_strength").get<double>();
      m.records.push_back(std::move(r));
    }
    if (j.at("count").get<std::size_t>() != m.records.size()) throw std::runtime_error("manifest count mismatch");
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

DatasetManifest emit_dataset(const SynthOptions& options, const std::filesystem::path& out_dir) {
  const PairSource source(options);
  std::error_code ec;
  for (const char* sub : {"input", "target", "gtmap"}) {
    std::filesystem::create_directories(out_dir / sub, ec);
    if (ec) throw IoError("cannot create " + (out_dir / sub).string() + ": " + ec.message());
  }

  DatasetManifest manifest;
  manifest.seed = options.seed;
  manifest.spec = options.spec;
  manifest.source = options.source_dir ? options.source_dir->filename().string() : "procedural";
  manifest.width = options.source_dir ? 0 : options.width;
  manifest.height = options.source_dir ? 0 : options.height;
  manifest.records.resize(options.count);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < options.count; i = next++) {
      try {
        SyntheticPair pair = source.make(i);
        const std::string file = pair.record.id + ".png";
        save_image(pair.tinted, out_dir / "input" / file, 8);
        save_image(pair.clean, out_dir / "target" / file, 8);
        save_map(pair.map, out_dir / "gtmap" / file);
        manifest.records[i] = std::move(pair.record);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = options.count;
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(options.count)));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  write_text(out_dir / "manifest.json", manifest.to_json());
  return manifest;
}

}  // namespace illumkit
