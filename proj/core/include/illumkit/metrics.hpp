#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "illumkit/image.hpp"

namespace illumkit {

/// Summary statistics. Quantiles use linear interpolation between order
/// statistics; trimean = (Q1 + 2 Q2 + Q3) / 4; std is the population value.
struct ErrorStats {
  double mean = 0;
  double median = 0;
  double trimean = 0;
  double std = 0;
  double min = 0;
  double max = 0;
  std::size_t count = 0;
};

/// Throws EmptySampleError on an empty sample.
ErrorStats compute_stats(std::span<const double> samples);

/// Angle between two illuminants in degrees, in [0, 180]. Computed as
/// atan2(|a x b|, a . b). Throws DomainError for a zero-norm vector.
double angular_error(const IlluminantVector& a, const IlluminantVector& b);
double angular_error(const Rgb& a, const Rgb& b);

struct AngularErrorMap {
  int width = 0;
  int height = 0;
  std::vector<double> degrees;  // 0 where invalid
  std::vector<uint8_t> valid;   // both maps valid
  ErrorStats stats;
  double invalid_fraction = 0;
};

/// Per-pixel angular error over the pixels valid in both maps. Throws
/// ShapeError on a size mismatch and EmptySampleError if no pixel is valid
/// in both.
AngularErrorMap angular_error_map(const IlluminationMap& gt, const IlluminationMap& est);

/// Recovers e = input / gt and e* = input / pred per pixel and compares them.
AngularErrorMap angular_error_from_images(const Image& input, const Image& gt, const Image& pred,
                                          const MaskThresholds& thr = {});

/// Peak 1.0, MSE floored at 1e-10 (so the result is capped at 100 dB).
double psnr(const Image& a, const Image& b);

/// Mean SSIM of the Rec.601 luma of both images over all positions where an
/// 11x11 Gaussian window (sigma 1.5) fits; K1 = 0.01, K2 = 0.03, L = 1.
/// Throws ShapeError if min(H,W) < 11.
double ssim(const Image& a, const Image& b);

/// Rec.601 luma, 0.299 R + 0.587 G + 0.114 B.
std::vector<double> luma(const Image& img);

/// CIE 1976 color difference per pixel. Inputs are treated as sRGB-encoded
/// and converted through linear RGB and XYZ (D65) to L*a*b*.
std::vector<double> delta_e76_map(const Image& a, const Image& b);
ErrorStats delta_e76(const Image& a, const Image& b);

/// sRGB-encoded color to CIE L*a*b* (D65 white).
Rgb srgb_to_lab(const Rgb& srgb);

}  // namespace illumkit
