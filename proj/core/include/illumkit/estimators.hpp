#pragma once

// Grey-based illuminant estimation.
//
// Uniform estimates follow the grey-edge family: for derivative order n,
// Minkowski norm p and pre-smoothing sigma,
//
//   e_c ~ ( mean_over_pixels |D^n (G_sigma * I)_c|^p )^(1/p)
//
// with p = infinity meaning the per-channel maximum. Grey World, White
// Patch, Shades of Gray and first/second order Grey Edge are presets.

#include <limits>
#include <string>
#include <string_view>

#include "illumkit/image.hpp"

namespace illumkit {

struct GreyFrameworkParams {
  int deriv_order = 0;         // n in {0,1,2}
  double minkowski_p = 1.0;    // p in [1, inf]
  double smoothing_sigma = 0;  // pixels, >= 0

  void validate() const;

  static GreyFrameworkParams grey_world() { return {0, 1.0, 0.0}; }
  static GreyFrameworkParams white_patch() { return {0, std::numeric_limits<double>::infinity(), 0.0}; }
  static GreyFrameworkParams shades_of_gray() { return {0, 6.0, 0.0}; }
  static GreyFrameworkParams grey_edge1() { return {1, 1.0, 1.0}; }
  static GreyFrameworkParams grey_edge2() { return {2, 1.0, 1.0}; }
};

enum class Interpolation { kNearest, kBilinear };

struct GridParams {
  int patch_size = 32;
  GreyFrameworkParams local_method = GreyFrameworkParams::grey_world();
  Interpolation interpolation = Interpolation::kBilinear;

  /// Throws ShapeError unless 4 <= patch_size <= min(width, height).
  void validate(int width, int height) const;
};

struct LsacParams {
  double sigma = 16.0;  // pixels, > 0

  /// min(H,W) / 4.
  static LsacParams defaults_for(const Image& img);
};

struct UniformEstimate {
  IlluminantVector illuminant;  // unit L2 length
  /// A channel produced a zero response and the estimate fell back to the
  /// achromatic (1,1,1)/sqrt(3).
  bool fallback = false;
};

/// Throws ShapeError for an empty image (or one smaller than 3x3 when
/// n > 0) and DegenerateInputError for an all-black image.
UniformEstimate estimate_uniform(const Image& img, const GreyFrameworkParams& params);

/// Tiles the image into patch_size squares (the last row/column may be
/// narrower), estimates each patch and spreads the estimates per pixel.
/// Patches without signal use the achromatic fallback, so every pixel is
/// valid.
IlluminationMap estimate_map_grid(const Image& img, const GridParams& params);

/// Local space average color: the Gaussian-blurred image, normalized per
/// pixel. Pixels whose blurred color has a zero channel are invalid.
IlluminationMap estimate_map_lsac(const Image& img, const LsacParams& params);

/// Parsed CLI method string: gw, wp, sog, ge1, ge2, grid:<method>, lsac.
struct MethodSpec {
  enum class Kind { kUniform, kGrid, kLsac };
  Kind kind = Kind::kUniform;
  GreyFrameworkParams framework = GreyFrameworkParams::grey_world();
  std::string name;
};

/// Throws std::invalid_argument for unknown names.
MethodSpec parse_method(std::string_view name);

}  // namespace illumkit
