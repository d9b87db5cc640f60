#include "illumkit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "illumkit/error.hpp"
#include "illumkit/random.hpp"

namespace illumkit {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) throw ShapeError(std::string(what) + ": image dimensions differ");
}

double norm3(const Rgb& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
double dot3(const Rgb& a, const Rgb& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Shared angular term. reference[i] is the ground-truth illuminant at pixel
// i (any positive scale); valid marks the pixels that contribute.
LossResult angular_term(const Image& input, const Image& pred, const std::vector<Rgb>& reference,
                        const std::vector<uint8_t>& valid) {
  const std::size_t n = input.pixel_count();
  const auto n_valid = static_cast<std::size_t>(std::count(valid.begin(), valid.end(), uint8_t{1}));
  if (n_valid == 0) throw EmptySampleError("angular loss: no valid pixels");

  LossResult out{0.0, Image(pred.width(), pred.height()), static_cast<double>(n_valid) / n};
  auto grad = out.grad.data();
  const double scale = kRadToDeg / static_cast<double>(n_valid);
  double sum = 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    if (!valid[i]) continue;
    const Rgb in = input.pixel(i);
    const Rgb p = pred.pixel(i);
    Rgb q{}, v{};
    for (int c = 0; c < kChannels; ++c) {
      q[c] = std::max(p[c], kPredictionFloor);
      v[c] = in[c] / q[c];
    }
    const double nu = norm3(reference[i]);
    const double nv = norm3(v);
    const Rgb u{reference[i][0] / nu, reference[i][1] / nu, reference[i][2] / nu};
    const Rgb vh{v[0] / nv, v[1] / nv, v[2] / nv};

    const double cosine = dot3(u, vh);
    // Component of u orthogonal to v; its length is sin(angle).
    const Rgb w{u[0] - cosine * vh[0], u[1] - cosine * vh[1], u[2] - cosine * vh[2]};
    const Rgb cross{u[1] * vh[2] - u[2] * vh[1], u[2] * vh[0] - u[0] * vh[2], u[0] * vh[1] - u[1] * vh[0]};
    const double sine = norm3(cross);
    sum += std::atan2(sine, cosine);

    const double nw = norm3(w);
    if (!(nw > 0.0)) continue;  // angle is at its minimum; subgradient 0
    for (int c = 0; c < kChannels; ++c) {
      if (p[c] <= kPredictionFloor) continue;
      const double dtheta_dv = -w[c] / (nw * nv);
      const double dv_dp = -in[c] / (q[c] * q[c]);
      grad[3 * i + c] = scale * dtheta_dv * dv_dp;
    }
  }
  out.value = sum * scale;
  return out;
}

}  // namespace

void LossWeights::validate() const {
  if (!(lambda_l1 >= 0.0) || !std::isfinite(lambda_l1) || !(lambda_ang >= 0.0) || !std::isfinite(lambda_ang)) {
    throw DomainError("loss weights must be finite and >= 0");
  }
}

LossResult l1_loss(const Image& pred, const Image& target) {
  require_same_shape(pred, target, "l1_loss");
  if (pred.empty()) throw EmptySampleError("l1_loss of empty images");
  LossResult out{0.0, Image(pred.width(), pred.height()), 1.0};
  const auto p = pred.data(), t = target.data();
  auto g = out.grad.data();
  const double inv_n = 1.0 / static_cast<double>(p.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - t[i];
    sum += std::abs(d);
    g[i] = d > 0.0 ? inv_n : (d < 0.0 ? -inv_n : 0.0);
  }
  out.value = sum * inv_n;
  return out;
}

LossResult angular_loss(const Image& input, const Image& pred, const Image& target,
                        const MaskThresholds& thr) {
  require_same_shape(input, pred, "angular_loss");
  require_same_shape(input, target, "angular_loss");
  thr.validate();
  const std::size_t n = input.pixel_count();
  std::vector<Rgb> reference(n);
  std::vector<uint8_t> valid(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Rgb in = input.pixel(i), t = target.pixel(i);
    if (!thr.accepts(in) || !thr.accepts(t)) continue;
    reference[i] = {in[0] / t[0], in[1] / t[1], in[2] / t[2]};
    valid[i] = 1;
  }
  return angular_term(input, pred, reference, valid);
}

LossResult angular_loss(const Image& input, const Image& pred, const IlluminationMap& gt_map,
                        const MaskThresholds& thr) {
  require_same_shape(input, pred, "angular_loss");
  if (!gt_map.matches(input)) throw ShapeError("angular_loss: map dimensions differ");
  thr.validate();
  const std::size_t n = input.pixel_count();
  std::vector<Rgb> reference(n);
  std::vector<uint8_t> valid(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Rgb e = gt_map.pixel(i);
    if (!gt_map.valid[i] || !(norm3(e) > 0.0) || !thr.accepts(input.pixel(i))) continue;
    reference[i] = e;
    valid[i] = 1;
  }
  return angular_term(input, pred, reference, valid);
}

LossResult combined_loss(const Image& input, const Image& pred, const Image& target,
                         const IlluminationMap* gt_map, const LossWeights& weights,
                         const MaskThresholds& thr) {
  weights.validate();
  require_same_shape(pred, target, "combined_loss");
  LossResult out{0.0, Image(pred.width(), pred.height()), 1.0};
  auto g = out.grad.data();
  if (weights.lambda_l1 > 0.0) {
    const LossResult l1 = l1_loss(pred, target);
    out.value += weights.lambda_l1 * l1.value;
    const auto lg = l1.grad.data();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += weights.lambda_l1 * lg[i];
  }
  if (weights.lambda_ang > 0.0) {
    const LossResult ang = gt_map ? angular_loss(input, pred, *gt_map, thr) : angular_loss(input, pred, target, thr);
    out.value += weights.lambda_ang * ang.value;
    out.valid_fraction = ang.valid_fraction;
    const auto ag = ang.grad.data();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += weights.lambda_ang * ag[i];
  }
  return out;
}

namespace {

Image random_image(SplitMix64& rng, int w, int h, double lo, double hi) {
  Image img(w, h);
  for (double& v : img.data()) v = rng.uniform(lo, hi);
  return img;
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

std::string describe(int trial, std::size_t entry, int width) {
  const std::size_t pixel = entry / kChannels;
  return "trial " + std::to_string(trial) + ", pixel (" + std::to_string(pixel % width) + "," +
         std::to_string(pixel / width) + "), channel " + std::to_string(entry % kChannels);
}

}  // namespace

GradientCheckResult check_gradients(const GradientCheckOptions& options) {
  if (options.width < 1 || options.height < 1) throw ShapeError("gradient check needs a non-empty size");
  GradientCheckResult result;
  result.trials = std::max(options.trials, 0);
  const double h = options.step;

  for (int trial = 0; trial < result.trials; ++trial) {
    SplitMix64 rng(SplitMix64::stream_seed(options.seed, static_cast<uint64_t>(trial)));
    const Image input = random_image(rng, options.width, options.height, 0.05, 0.95);
    Image target = random_image(rng, options.width, options.height, 0.05, 0.95);
    // One saturated target pixel per trial exercises the mask path.
    target.set_pixel(rng.below(target.pixel_count()), {1.0, 1.0, 1.0});
    Image pred = random_image(rng, options.width, options.height, 0.05, 0.95);

    const LossResult l1 = l1_loss(pred, target);
    LossResult ang = angular_loss(input, pred, target);
    if (options.corrupt_gradient) {
      for (double& v : ang.grad.data()) v *= 1.01;
    }

    auto entries = pred.data();
    const auto t = target.data();
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const double original = entries[k];
      entries[k] = original + h;
      const double l1_plus = l1_loss(pred, target).value;
      const double ang_plus = angular_loss(input, pred, target).value;
      entries[k] = original - h;
      const double l1_minus = l1_loss(pred, target).value;
      const double ang_minus = angular_loss(input, pred, target).value;
      entries[k] = original;
      ++result.coordinates_checked;

      if (std::abs(original - t[k]) > 2 * h) {
        const double e = relative_error(l1.grad.data()[k], (l1_plus - l1_minus) / (2 * h));
        if (e > result.max_rel_l1) {
          result.max_rel_l1 = e;
          result.worst_l1 = describe(trial, k, options.width);
        }
      }
      if (std::abs(original - kPredictionFloor) > 2 * h) {
        const double e = relative_error(ang.grad.data()[k], (ang_plus - ang_minus) / (2 * h));
        if (e > result.max_rel_angular) {
          result.max_rel_angular = e;
          result.worst_angular = describe(trial, k, options.width);
        }
      }
    }
  }
  result.passed = result.max_rel_l1 < options.l1_tolerance && result.max_rel_angular < options.angular_tolerance;
  return result;
}

}  // namespace illumkit
