#include "illumkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "illumkit/error.hpp"

namespace illumkit {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": images are " + std::to_string(a.width()) + "x" +
                     std::to_string(a.height()) + " and " + std::to_string(b.width()) + "x" +
                     std::to_string(b.height()));
  }
}

// 1-D 'valid' correlation along rows or columns of a single plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int w, int h,
                                 const std::vector<double>& k, bool horizontal, int& ow, int& oh) {
  const int n = static_cast<int>(k.size());
  ow = horizontal ? w - n + 1 : w;
  oh = horizontal ? h : h - n + 1;
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) {
        acc += k[j] * (horizontal ? plane[static_cast<std::size_t>(y) * w + x + j]
                                  : plane[static_cast<std::size_t>(y + j) * w + x]);
      }
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

std::vector<double> window_mean(const std::vector<double>& plane, int w, int h, const std::vector<double>& k) {
  int tw = 0, th = 0, ow = 0, oh = 0;
  const auto tmp = filter_valid(plane, w, h, k, true, tw, th);
  return filter_valid(tmp, tw, th, k, false, ow, oh);
}

}  // namespace

ErrorStats compute_stats(std::span<const double> samples) {
  if (samples.empty()) throw EmptySampleError("statistics over an empty sample");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  ErrorStats st;
  st.count = s.size();
  double sum = 0.0;
  for (double v : s) sum += v;
  st.mean = sum / static_cast<double>(s.size());
  double var = 0.0;
  for (double v : s) var += (v - st.mean) * (v - st.mean);
  st.std = std::sqrt(var / static_cast<double>(s.size()));
  st.min = s.front();
  st.max = s.back();
  st.median = quantile_sorted(s, 0.5);
  st.trimean = (quantile_sorted(s, 0.25) + 2.0 * st.median + quantile_sorted(s, 0.75)) / 4.0;
  return st;
}

double angular_error(const Rgb& a, const Rgb& b) {
  const double na = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  const double nb = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
  if (!(na > 0.0) || !(nb > 0.0)) throw DomainError("angular error of a zero-norm vector");
  // Unit vectors first so the result does not depend on the input scales.
  const Rgb u{a[0] / na, a[1] / na, a[2] / na};
  const Rgb v{b[0] / nb, b[1] / nb, b[2] / nb};
  const double cx = u[1] * v[2] - u[2] * v[1];
  const double cy = u[2] * v[0] - u[0] * v[2];
  const double cz = u[0] * v[1] - u[1] * v[0];
  const double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
  const double dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
  return std::atan2(cross, dot) * kRadToDeg;
}

double angular_error(const IlluminantVector& a, const IlluminantVector& b) {
  return angular_error(a.rgb(), b.rgb());
}

AngularErrorMap angular_error_map(const IlluminationMap& gt, const IlluminationMap& est) {
  if (gt.width != est.width || gt.height != est.height) {
    throw ShapeError("angular_error_map: map dimensions differ");
  }
  AngularErrorMap out;
  out.width = gt.width;
  out.height = gt.height;
  out.degrees.assign(gt.pixel_count(), 0.0);
  out.valid.assign(gt.pixel_count(), 0);
  std::vector<double> samples;
  samples.reserve(gt.pixel_count());
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    if (!gt.valid[i] || !est.valid[i]) continue;
    const double deg = angular_error(gt.pixel(i), est.pixel(i));
    out.degrees[i] = deg;
    out.valid[i] = 1;
    samples.push_back(deg);
  }
  if (samples.empty()) throw EmptySampleError("no pixel is valid in both illumination maps");
  out.stats = compute_stats(samples);
  out.invalid_fraction = 1.0 - static_cast<double>(samples.size()) / static_cast<double>(gt.pixel_count());
  return out;
}

AngularErrorMap angular_error_from_images(const Image& input, const Image& gt, const Image& pred,
                                          const MaskThresholds& thr) {
  require_same_shape(input, gt, "angular_error_from_images");
  require_same_shape(input, pred, "angular_error_from_images");
  return angular_error_map(recover_illumination_map(input, gt, thr),
                           recover_illumination_map(input, pred, thr));
}

double psnr(const Image& a, const Image& b) {
  require_same_shape(a, b, "psnr");
  if (a.empty()) throw EmptySampleError("psnr of empty images");
  const auto da = a.data(), db = b.data();
  double sse = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) sse += (da[i] - db[i]) * (da[i] - db[i]);
  const double mse = std::max(sse / static_cast<double>(da.size()), 1e-10);
  return 10.0 * std::log10(1.0 / mse);
}

std::vector<double> luma(const Image& img) {
  std::vector<double> y(img.pixel_count());
  const auto d = img.data();
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = 0.299 * d[3 * i] + 0.587 * d[3 * i + 1] + 0.114 * d[3 * i + 2];
  }
  return y;
}

double ssim(const Image& a, const Image& b) {
  require_same_shape(a, b, "ssim");
  constexpr int kWindow = 11;
  constexpr double kSigma = 1.5;
  if (std::min(a.width(), a.height()) < kWindow) throw ShapeError("ssim needs images of at least 11x11");

  std::vector<double> k(kWindow);
  double ksum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double t = i - kWindow / 2;
    k[i] = std::exp(-t * t / (2 * kSigma * kSigma));
    ksum += k[i];
  }
  for (double& v : k) v /= ksum;

  const int w = a.width(), h = a.height();
  const auto ya = luma(a), yb = luma(b);
  std::vector<double> aa(ya.size()), bb(ya.size()), ab(ya.size());
  for (std::size_t i = 0; i < ya.size(); ++i) {
    aa[i] = ya[i] * ya[i];
    bb[i] = yb[i] * yb[i];
    ab[i] = ya[i] * yb[i];
  }
  const auto mu_a = window_mean(ya, w, h, k);
  const auto mu_b = window_mean(yb, w, h, k);
  const auto m_aa = window_mean(aa, w, h, k);
  const auto m_bb = window_mean(bb, w, h, k);
  const auto m_ab = window_mean(ab, w, h, k);

  constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = m_aa[i] - ma * ma, vb = m_bb[i] - mb * mb, cov = m_ab[i] - ma * mb;
    total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

Rgb srgb_to_lab(const Rgb& srgb) {
  const double r = srgb_to_linear(srgb[0]), g = srgb_to_linear(srgb[1]), b = srgb_to_linear(srgb[2]);
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  constexpr double delta = 6.0 / 29.0;
  auto f = [](double t) {
    return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
  };
  const double fx = f(x / 0.95047), fy = f(y / 1.0), fz = f(z / 1.08883);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

std::vector<double> delta_e76_map(const Image& a, const Image& b) {
  require_same_shape(a, b, "delta_e76");
  std::vector<double> out(a.pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Rgb la = srgb_to_lab(a.pixel(i)), lb = srgb_to_lab(b.pixel(i));
    out[i] = std::sqrt((la[0] - lb[0]) * (la[0] - lb[0]) + (la[1] - lb[1]) * (la[1] - lb[1]) +
                       (la[2] - lb[2]) * (la[2] - lb[2]));
  }
  return out;
}

ErrorStats delta_e76(const Image& a, const Image& b) { return compute_stats(delta_e76_map(a, b)); }

}  // namespace illumkit
