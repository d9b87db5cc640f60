#pragma once

// Seeded synthesis of multi-illuminant training pairs.
//
// A tint map is a per-pixel illuminant field built from K colored Gaussian
// blobs: e(x,y) = sum_k w_k c_k / sum_k w_k with w_k = exp(-|p - mu_k|^2 /
// (2 sigma_k^2)), rescaled per pixel so its largest channel is 1 and then
// floored at min_channel_floor. Clean images are tinted by per-pixel
// multiplication (inverse von Kries), so in-range inputs never clip.
//
// Dataset layout written by emit_dataset():
//   out/input/NNNNN.png   tinted image, 8-bit RGB
//   out/target/NNNNN.png  clean image, 8-bit RGB
//   out/gtmap/NNNNN.png   tint map, 16-bit RGB, channel = round(e * 65535)
//   out/manifest.json     provenance, see DatasetManifest
// Every image index owns an RNG substream derived from (seed, index), so any
// prefix of a dataset is reproducible independently of the total count.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "illumkit/image.hpp"
#include "illumkit/random.hpp"

namespace illumkit {

enum class TintMode { kMulti, kUniform, kShadow };

std::string to_string(TintMode mode);
/// Throws std::invalid_argument for anything but multi, uniform, shadow.
TintMode parse_tint_mode(const std::string& name);

struct TintSpec {
  int num_illuminants = 3;                    // K in [1,3]
  std::array<double, 2> hue_range{0.0, 360.0};  // degrees
  std::array<double, 2> saturation_range{0.2, 0.8};
  std::array<double, 2> sigma_range{0.2, 0.6};  // fraction of max(W,H)
  double min_channel_floor = 0.2;
  TintMode mode = TintMode::kMulti;
  /// Uniform mode only: use this chromaticity instead of sampling one.
  std::optional<Rgb> forced_chromaticity;

  void validate() const;
};

struct TintRecord {
  std::vector<Rgb> illuminants;                 // chromaticities, max channel 1
  std::vector<std::array<double, 2>> centers;   // pixels (x, y)
  std::vector<double> sigmas;                   // pixels
  double shadow_strength = 0.0;                 // shadow mode only
};

struct TintMap {
  IlluminationMap map;
  TintRecord record;
};

/// Throws ShapeError for non-positive dimensions and DomainError for an
/// invalid spec.
TintMap gen_tint_map(int width, int height, const TintSpec& spec, SplitMix64& rng);

/// Per-pixel channel-wise product of clean and map.
Image synthesize_pair(const Image& clean, const IlluminationMap& map);

/// Multi-scale value-noise scene with independent per-channel chroma and a
/// few near-black shadows. Values stay in [0, 0.97].
Image procedural_texture(int width, int height, SplitMix64& rng);

/// HSV (hue in degrees) to RGB with value 1.
Rgb hsv_to_rgb(double hue_deg, double saturation, double value = 1.0);

struct SynthOptions {
  std::size_t count = 0;
  uint64_t seed = 0;
  TintSpec spec;
  /// Directory of clean PNGs (sorted by filename, used cyclically). When
  /// empty, procedural textures of width x height are generated.
  std::optional<std::filesystem::path> source_dir;
  int width = 64;
  int height = 64;
  unsigned threads = 1;
};

struct PairRecord {
  std::string id;      // five-digit index, e.g. "00007"
  std::string source;  // source filename or "procedural"
  int width = 0;
  int height = 0;
  TintRecord tint;
};

struct SyntheticPair {
  Image clean;
  Image tinted;
  IlluminationMap map;
  PairRecord record;
};

struct DatasetManifest {
  static constexpr int kSchemaVersion = 1;

  uint64_t seed = 0;
  TintSpec spec;
  std::string source = "procedural";
  int width = 0;   // procedural size; 0 when sized by sources
  int height = 0;
  std::vector<PairRecord> records;

  std::string to_json() const;
  static DatasetManifest from_json(const std::string& text);
};

/// Clean image sources for a dataset run.
class PairSource {
 public:
  /// Loads every *.png in options.source_dir (or prepares procedural
  /// generation). Throws IoError for an empty or unreadable source set.
  explicit PairSource(const SynthOptions& options);

  /// The float-precision pair for one index. Pure function of (options,
  /// sources, index).
  SyntheticPair make(std::size_t index) const;

 private:
  SynthOptions options_;
  std::vector<std::pair<std::string, Image>> sources_;
};

std::string pair_id(std::size_t index);

/// Writes the dataset layout described above and returns the manifest.
/// Output is byte-identical for any thread count.
DatasetManifest emit_dataset(const SynthOptions& options, const std::filesystem::path& out_dir);

}  // namespace illumkit
