#include "illumkit/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "illumkit/error.hpp"

namespace illumkit {

namespace {

void require_same_shape(const Image& img, const IlluminationMap& map, const char* what) {
  if (!map.matches(img)) {
    throw ShapeError(std::string(what) + ": map is " + std::to_string(map.width) + "x" +
                     std::to_string(map.height) + ", image is " + std::to_string(img.width()) +
                     "x" + std::to_string(img.height()));
  }
}

}  // namespace

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw ShapeError("negative image dimensions");
  data_.assign(pixel_count() * kChannels, fill);
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0) throw ShapeError("negative image dimensions");
  if (data_.size() != pixel_count() * kChannels) {
    throw ShapeError("image data length " + std::to_string(data_.size()) + " != " +
                     std::to_string(pixel_count() * kChannels));
  }
}

double IlluminantVector::norm() const { return std::sqrt(r * r + g * g + b * b); }

IlluminantVector IlluminantVector::normalized() const {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("cannot normalize a zero illuminant");
  return {r / n, g / n, b / n};
}

void IlluminantVector::validate() const {
  for (double v : {r, g, b}) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("illuminant components must be finite and >= 0");
  }
  if (r <= 0.0 && g <= 0.0 && b <= 0.0) throw DomainError("illuminant must have a positive component");
}

IlluminationMap::IlluminationMap(int w, int h, const Rgb& e) : width(w), height(h) {
  if (w < 0 || h < 0) throw ShapeError("negative map dimensions");
  data.resize(pixel_count() * kChannels);
  for (std::size_t i = 0; i < pixel_count(); ++i) set_pixel(i, e);
  valid.assign(pixel_count(), 1);
}

std::size_t IlluminationMap::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), uint8_t{1}));
}

void MaskThresholds::validate() const {
  if (tau_black == 0.0 && std::isinf(tau_sat) && tau_sat > 0) return;
  if (!(tau_black >= 0.0 && tau_black < 1.0)) throw DomainError("tau_black must lie in [0,1)");
  if (!(tau_sat > 0.0 && tau_sat <= 1.0)) throw DomainError("tau_sat must lie in (0,1]");
  if (!(tau_black < tau_sat)) throw DomainError("tau_black must be below tau_sat");
}

Image von_kries_correct(const Image& img, const IlluminantVector& e) {
  if (!(e.r > 0.0 && e.g > 0.0 && e.b > 0.0)) {
    throw DomainError("von Kries correction needs strictly positive illuminant components");
  }
  Image out = img;
  auto d = out.data();
  for (std::size_t i = 0; i < d.size(); i += 3) {
    d[i] /= e.r;
    d[i + 1] /= e.g;
    d[i + 2] /= e.b;
  }
  return out;
}

Image apply_cast(const Image& img, const IlluminantVector& e) {
  e.validate();
  Image out = img;
  auto d = out.data();
  for (std::size_t i = 0; i < d.size(); i += 3) {
    d[i] *= e.r;
    d[i + 1] *= e.g;
    d[i + 2] *= e.b;
  }
  return out;
}

Image apply_cast_map(const Image& img, const IlluminationMap& map) {
  require_same_shape(img, map, "apply_cast_map");
  Image out = img;
  auto d = out.data();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    if (!map.valid[i]) continue;
    for (int c = 0; c < kChannels; ++c) d[3 * i + c] *= map.data[3 * i + c];
  }
  return out;
}

MaskedImage correct_with_map(const Image& img, const IlluminationMap& map) {
  require_same_shape(img, map, "correct_with_map");
  MaskedImage out{img, std::vector<uint8_t>(img.pixel_count(), 0)};
  auto d = out.image.data();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const Rgb e = map.pixel(i);
    if (!map.valid[i] || !(e[0] > 0.0 && e[1] > 0.0 && e[2] > 0.0)) continue;
    for (int c = 0; c < kChannels; ++c) d[3 * i + c] /= e[c];
    out.valid[i] = 1;
  }
  return out;
}

IlluminationMap recover_illumination_map(const Image& input, const Image& reference,
                                         const MaskThresholds& thr) {
  if (!input.same_shape(reference)) throw ShapeError("recover_illumination_map: shape mismatch");
  thr.validate();
  IlluminationMap map(input.width(), input.height(), Rgb{0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < input.pixel_count(); ++i) {
    const Rgb in = input.pixel(i);
    const Rgb ref = reference.pixel(i);
    if (!thr.accepts(in) || !thr.accepts(ref)) {
      map.valid[i] = 0;
      continue;
    }
    Rgb e{in[0] / ref[0], in[1] / ref[1], in[2] / ref[2]};
    const double n = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
    if (!std::isfinite(n) || !(n > 0.0)) {
      map.valid[i] = 0;
      continue;
    }
    map.set_pixel(i, {e[0] / n, e[1] / n, e[2] / n});
  }
  return map;
}

void normalize_map(IlluminationMap& map) {
  for (std::size_t i = 0; i < map.pixel_count(); ++i) {
    const Rgb e = map.pixel(i);
    const double n = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
    const bool ok = e[0] > 0.0 && e[1] > 0.0 && e[2] > 0.0 && std::isfinite(n);
    if (!ok) {
      map.valid[i] = 0;
      map.set_pixel(i, {0.0, 0.0, 0.0});
      continue;
    }
    map.set_pixel(i, {e[0] / n, e[1] / n, e[2] / n});
  }
}

Image clipped(const Image& img) {
  Image out = img;
  for (double& v : out.data()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double v) {
  return v <= 0.0031308 ? v * 12.92 : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

Image srgb_decode(const Image& img) {
  Image out = img;
  for (double& v : out.data()) v = srgb_to_linear(v);
  return out;
}

}  // namespace illumkit
