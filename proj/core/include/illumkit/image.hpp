#pragma once

// Core data types: images, illuminant vectors and per-pixel illumination
// maps, plus the diagonal (von Kries) correction model built on them.
//
// Memory layout: row-major, channel-interleaved. The value of channel c at
// column x, row y lives at data[(y * width + x) * 3 + c] with c = 0,1,2 for
// R,G,B. Values are linear RGB with nominal range [0,1].

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace illumkit {

inline constexpr int kChannels = 3;

using Rgb = std::array<double, 3>;

class Image {
 public:
  Image() = default;
  /// Allocates a width x height image filled with `fill`.
  Image(int width, int height, double fill = 0.0);
  /// Wraps existing interleaved data; throws ShapeError on a size mismatch.
  Image(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const { return pixel_count() == 0; }

  double& at(int x, int y, int c) { return data_[index(x, y) + c]; }
  double at(int x, int y, int c) const { return data_[index(x, y) + c]; }

  Rgb pixel(std::size_t i) const { return {data_[3 * i], data_[3 * i + 1], data_[3 * i + 2]}; }
  void set_pixel(std::size_t i, const Rgb& v) {
    data_[3 * i] = v[0];
    data_[3 * i + 1] = v[1];
    data_[3 * i + 2] = v[2];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Color of the illumination. Scale-free: only its direction matters for
/// comparison, but von Kries correction uses the components as given.
struct IlluminantVector {
  double r = 1.0;
  double g = 1.0;
  double b = 1.0;

  Rgb rgb() const { return {r, g, b}; }
  static IlluminantVector from(const Rgb& v) { return {v[0], v[1], v[2]}; }

  double norm() const;
  /// Unit L2 length; throws DomainError for the zero vector.
  IlluminantVector normalized() const;
  /// Throws DomainError unless all components are finite, nonnegative and at
  /// least one is positive.
  void validate() const;

  /// Canonical white, (1,1,1).
  static IlluminantVector canonical() { return {1.0, 1.0, 1.0}; }

  friend bool operator==(const IlluminantVector&, const IlluminantVector&) = default;
};

/// Per-pixel illuminant field e(x,y) with a validity mask. Pixels marked
/// valid carry three finite positive components.
struct IlluminationMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;   // width * height * 3, same layout as Image
  std::vector<uint8_t> valid;  // width * height

  IlluminationMap() = default;
  /// All pixels set to `e`, all valid.
  IlluminationMap(int w, int h, const Rgb& e = {1.0, 1.0, 1.0});

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  Rgb pixel(std::size_t i) const { return {data[3 * i], data[3 * i + 1], data[3 * i + 2]}; }
  void set_pixel(std::size_t i, const Rgb& v) {
    data[3 * i] = v[0];
    data[3 * i + 1] = v[1];
    data[3 * i + 2] = v[2];
  }
  std::size_t valid_count() const;
  bool matches(const Image& img) const { return width == img.width() && height == img.height(); }
};

/// Pixels with any channel <= tau_black or >= tau_sat are unreliable for
/// pixel-wise division and are excluded from recovery and losses.
struct MaskThresholds {
  double tau_black = 1.0 / 255.0;
  double tau_sat = 254.0 / 255.0;

  /// Throws DomainError unless 0 <= tau_black < tau_sat and tau_sat <= 1,
  /// or the thresholds are the `disabled()` sentinel.
  void validate() const;
  bool accepts(const Rgb& v) const {
    return v[0] > tau_black && v[1] > tau_black && v[2] > tau_black && v[0] < tau_sat &&
           v[1] < tau_sat && v[2] < tau_sat;
  }

  /// Masking turned off: only exact zeros (which cannot be divided by) are
  /// rejected.
  static MaskThresholds disabled() { return {0.0, std::numeric_limits<double>::infinity()}; }
};

/// Image paired with the mask of pixels that were actually transformed.
struct MaskedImage {
  Image image;
  std::vector<uint8_t> valid;
};

// Diagonal model.

/// Divides every pixel channel-wise by e. Throws DomainError if any
/// component of e is <= 0.
Image von_kries_correct(const Image& img, const IlluminantVector& e);

/// Multiplies every pixel channel-wise by e (inverse von Kries). No clipping.
Image apply_cast(const Image& img, const IlluminantVector& e);

/// Per-pixel inverse von Kries with a spatially varying illuminant. Invalid
/// map pixels pass through unchanged.
Image apply_cast_map(const Image& img, const IlluminationMap& map);

/// Per-pixel correction I / e(x,y). Invalid map pixels pass through
/// unchanged and are reported as invalid in the returned mask.
MaskedImage correct_with_map(const Image& img, const IlluminationMap& map);

/// Pixel-wise illumination recovery e = input / reference, L2-normalized.
/// A pixel is invalid when any channel of either image falls outside
/// (tau_black, tau_sat).
IlluminationMap recover_illumination_map(const Image& input, const Image& reference,
                                         const MaskThresholds& thr = {});

/// Rescales every pixel to unit L2 length. Pixels whose vector is not
/// strictly positive in all channels are marked invalid and zeroed.
void normalize_map(IlluminationMap& map);

/// Elementwise clamp to [0,1].
Image clipped(const Image& img);

// sRGB transfer function (IEC 61966-2-1).
double srgb_to_linear(double v);
double linear_to_srgb(double v);
Image srgb_decode(const Image& img);

}  // namespace illumkit
