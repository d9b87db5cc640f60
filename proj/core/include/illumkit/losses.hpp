#pragma once

// Loss terms for training an image-to-image color constancy model: an L1
// term and an angular term that recovers the illuminant implied by the
// prediction (e* = I / I*) and measures its angle to the ground truth.
// Both come with analytic gradients with respect to the prediction.

#include <cstdint>
#include <string>

#include "illumkit/image.hpp"

namespace illumkit {

/// Predictions are clamped below at this value before division. The
/// gradient is zero inside the clamped region.
inline constexpr double kPredictionFloor = 1e-4;

struct LossWeights {
  double lambda_l1 = 0.0;
  double lambda_ang = 0.0;

  void validate() const;
};

struct LossResult {
  double value = 0.0;
  Image grad;  // d value / d pred, same shape as pred
  double valid_fraction = 1.0;
};

/// value = mean |pred - target| over all entries; grad = sign(pred - target) / N.
LossResult l1_loss(const Image& pred, const Image& target);

/// Mean angle in degrees between e = input / target and e* = input / pred
/// over valid pixels. A pixel is valid when input and target both lie
/// inside the mask thresholds; validity never depends on pred. Throws
/// EmptySampleError if no pixel is valid.
LossResult angular_loss(const Image& input, const Image& pred, const Image& target,
                        const MaskThresholds& thr = {});

/// Same, comparing e* directly against a ground-truth illumination map.
/// Valid pixels are those valid in the map whose input lies inside the
/// thresholds.
LossResult angular_loss(const Image& input, const Image& pred, const IlluminationMap& gt_map,
                        const MaskThresholds& thr = {});

/// lambda_l1 * L1 + lambda_ang * angular. With gt_map the angular term uses
/// the map; otherwise it recovers e from input / target.
LossResult combined_loss(const Image& input, const Image& pred, const Image& target,
                         const IlluminationMap* gt_map, const LossWeights& weights,
                         const MaskThresholds& thr = {});

struct GradientCheckOptions {
  int trials = 100;
  int width = 8;
  int height = 8;
  uint64_t seed = 20190511;
  double step = 1e-5;
  double l1_tolerance = 1e-6;
  double angular_tolerance = 1e-4;
  /// Negative control: perturbs the analytic angular gradient.
  bool corrupt_gradient = false;
};

struct GradientCheckResult {
  int trials = 0;
  int coordinates_checked = 0;
  double max_rel_l1 = 0.0;
  double max_rel_angular = 0.0;
  bool passed = true;
  std::string worst_l1;       // "trial t, pixel (x,y), channel c"
  std::string worst_angular;
};

/// Compares analytic gradients with central finite differences on random
/// instances. Coordinates within 2h of a kink (|pred - target| for L1, the
/// prediction floor for the angular term) are skipped. Relative error is
/// |a - n| / max(|a|, |n|, 1e-6).
GradientCheckResult check_gradients(const GradientCheckOptions& options);

}  // namespace illumkit
