#include "illumkit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "filter.hpp"
#include "illumkit/error.hpp"

namespace illumkit {

namespace {

const IlluminantVector kAchromatic = IlluminantVector{1.0, 1.0, 1.0}.normalized();

// Framework formula without size checks; used directly for grid patches.
UniformEstimate framework_estimate(const Image& img, const GreyFrameworkParams& params) {
  const Image smoothed = detail::gaussian_blur(img, params.smoothing_sigma);
  const Image response = detail::derivative_magnitude(smoothed, params.deriv_order);
  const auto d = response.data();
  const std::size_t n = response.pixel_count();
  const double p = params.minkowski_p;

  Rgb e{0.0, 0.0, 0.0};
  if (std::isinf(p)) {
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < kChannels; ++c) e[c] = std::max(e[c], d[3 * i + c]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < kChannels; ++c) e[c] += p == 1.0 ? d[3 * i + c] : std::pow(d[3 * i + c], p);
    }
    for (double& v : e) v = p == 1.0 ? v / n : std::pow(v / n, 1.0 / p);
  }
  if (!(e[0] > 0.0 && e[1] > 0.0 && e[2] > 0.0) || !std::isfinite(e[0] + e[1] + e[2])) {
    return {kAchromatic, true};
  }
  return {IlluminantVector::from(e).normalized(), false};
}

struct Tiling {
  int count = 0;
  int size = 0;
  int extent = 0;

  int begin(int i) const { return i * size; }
  int end(int i) const { return std::min(extent, (i + 1) * size); }
  double center(int i) const { return 0.5 * (begin(i) + end(i) - 1); }
};

// Index of the last patch whose center is <= pos, plus the fractional
// offset toward the next one (clamped at the borders).
std::pair<int, double> locate(const Tiling& t, double pos) {
  if (t.count == 1 || pos <= t.center(0)) return {0, 0.0};
  if (pos >= t.center(t.count - 1)) return {t.count - 1, 0.0};
  int i = 0;
  while (i + 1 < t.count && t.center(i + 1) <= pos) ++i;
  const double frac = (pos - t.center(i)) / (t.center(i + 1) - t.center(i));
  return {i, frac};
}

}  // namespace

void GreyFrameworkParams::validate() const {
  if (deriv_order < 0 || deriv_order > 2) throw DomainError("derivative order must be 0, 1 or 2");
  if (!(minkowski_p >= 1.0)) throw DomainError("Minkowski p must be >= 1");
  if (!(smoothing_sigma >= 0.0) || !std::isfinite(smoothing_sigma)) {
    throw DomainError("smoothing sigma must be finite and >= 0");
  }
}

void GridParams::validate(int width, int height) const {
  local_method.validate();
  if (patch_size < 4 || patch_size > std::min(width, height)) {
    throw ShapeError("patch size " + std::to_string(patch_size) + " outside [4, " +
                     std::to_string(std::min(width, height)) + "]");
  }
}

LsacParams LsacParams::defaults_for(const Image& img) {
  return {std::max(1.0, std::min(img.width(), img.height()) / 4.0)};
}

UniformEstimate estimate_uniform(const Image& img, const GreyFrameworkParams& params) {
  params.validate();
  if (img.empty()) throw ShapeError("cannot estimate an illuminant from an empty image");
  if (params.deriv_order > 0 && (img.width() < 3 || img.height() < 3)) {
    throw ShapeError("derivative-based estimation needs at least a 3x3 image");
  }
  const auto d = img.data();
  if (std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; })) {
    throw DegenerateInputError("all-black image carries no illuminant information");
  }
  return framework_estimate(img, params);
}

IlluminationMap estimate_map_grid(const Image& img, const GridParams& params) {
  params.validate(img.width(), img.height());
  const int ps = params.patch_size;
  const Tiling tx{(img.width() + ps - 1) / ps, ps, img.width()};
  const Tiling ty{(img.height() + ps - 1) / ps, ps, img.height()};

  std::vector<Rgb> patch_estimates(static_cast<std::size_t>(tx.count) * ty.count);
  for (int py = 0; py < ty.count; ++py) {
    for (int px = 0; px < tx.count; ++px) {
      const int x0 = tx.begin(px), y0 = ty.begin(py);
      Image patch(tx.end(px) - x0, ty.end(py) - y0);
      for (int y = 0; y < patch.height(); ++y) {
        for (int x = 0; x < patch.width(); ++x) {
          for (int c = 0; c < kChannels; ++c) patch.at(x, y, c) = img.at(x0 + x, y0 + y, c);
        }
      }
      patch_estimates[static_cast<std::size_t>(py) * tx.count + px] =
          framework_estimate(patch, params.local_method).illuminant.rgb();
    }
  }
  auto estimate_at = [&](int px, int py) -> const Rgb& {
    return patch_estimates[static_cast<std::size_t>(py) * tx.count + px];
  };

  IlluminationMap map(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      Rgb e{};
      if (params.interpolation == Interpolation::kNearest) {
        e = estimate_at(x / ps, y / ps);
      } else {
        const auto [ix, fx] = locate(tx, x);
        const auto [iy, fy] = locate(ty, y);
        const int jx = std::min(ix + 1, tx.count - 1), jy = std::min(iy + 1, ty.count - 1);
        for (int c = 0; c < kChannels; ++c) {
          const double top = (1 - fx) * estimate_at(ix, iy)[c] + fx * estimate_at(jx, iy)[c];
          const double bottom = (1 - fx) * estimate_at(ix, jy)[c] + fx * estimate_at(jx, jy)[c];
          e[c] = (1 - fy) * top + fy * bottom;
        }
      }
      map.set_pixel(static_cast<std::size_t>(y) * img.width() + x, e);
    }
  }
  normalize_map(map);
  return map;
}

IlluminationMap estimate_map_lsac(const Image& img, const LsacParams& params) {
  if (!(params.sigma > 0.0) || !std::isfinite(params.sigma)) throw DomainError("LSAC sigma must be > 0");
  if (img.empty()) throw ShapeError("cannot estimate a map from an empty image");
  const Image blurred = detail::gaussian_blur(img, params.sigma);
  IlluminationMap map(img.width(), img.height());
  std::copy(blurred.data().begin(), blurred.data().end(), map.data.begin());
  normalize_map(map);
  return map;
}

MethodSpec parse_method(std::string_view name) {
  auto framework = [](std::string_view n) -> std::optional<GreyFrameworkParams> {
    if (n == "gw") return GreyFrameworkParams::grey_world();
    if (n == "wp") return GreyFrameworkParams::white_patch();
    if (n == "sog") return GreyFrameworkParams::shades_of_gray();
    if (n == "ge1") return GreyFrameworkParams::grey_edge1();
    if (n == "ge2") return GreyFrameworkParams::grey_edge2();
    return std::nullopt;
  };
  MethodSpec spec;
  spec.name = std::string(name);
  if (name == "lsac") {
    spec.kind = MethodSpec::Kind::kLsac;
    return spec;
  }
  constexpr std::string_view kGridPrefix = "grid:";
  if (name.starts_with(kGridPrefix)) {
    if (auto f = framework(name.substr(kGridPrefix.size()))) {
      spec.kind = MethodSpec::Kind::kGrid;
      spec.framework = *f;
      return spec;
    }
  } else if (auto f = framework(name)) {
    spec.framework = *f;
    return spec;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected gw, wp, sog, ge1, ge2, grid:<method> or lsac)");
}

}  // namespace illumkit
