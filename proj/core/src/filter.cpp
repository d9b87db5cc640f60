#include "filter.hpp"

#include <cmath>

#include "illumkit/error.hpp"

namespace illumkit::detail {

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (sigma < 0.0 || !std::isfinite(sigma)) throw DomainError("gaussian sigma must be finite and >= 0");
  if (sigma == 0.0) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

Image gaussian_blur(const Image& img, double sigma) {
  const auto k = gaussian_kernel(sigma);
  if (k.size() == 1) return img;
  const int r = static_cast<int>(k.size() / 2);
  const int w = img.width(), h = img.height();

  Image tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < kChannels; ++c) {
        double acc = 0.0;
        for (int j = -r; j <= r; ++j) acc += k[j + r] * img.at(reflect_index(x + j, w), y, c);
        tmp.at(x, y, c) = acc;
      }
    }
  }
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < kChannels; ++c) {
        double acc = 0.0;
        for (int j = -r; j <= r; ++j) acc += k[j + r] * tmp.at(x, reflect_index(y + j, h), c);
        out.at(x, y, c) = acc;
      }
    }
  }
  return out;
}

Image derivative_magnitude(const Image& img, int order) {
  if (order < 0 || order > 2) throw DomainError("derivative order must be 0, 1 or 2");
  const int w = img.width(), h = img.height();
  Image out(w, h);
  auto f = [&](int x, int y, int c) { return img.at(reflect_index(x, w), reflect_index(y, h), c); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < kChannels; ++c) {
        double m = 0.0;
        if (order == 0) {
          m = std::abs(f(x, y, c));
        } else if (order == 1) {
          const double fx = 0.5 * (f(x + 1, y, c) - f(x - 1, y, c));
          const double fy = 0.5 * (f(x, y + 1, c) - f(x, y - 1, c));
          m = std::sqrt(fx * fx + fy * fy);
        } else {
          const double fxx = f(x + 1, y, c) - 2.0 * f(x, y, c) + f(x - 1, y, c);
          const double fyy = f(x, y + 1, c) - 2.0 * f(x, y, c) + f(x, y - 1, c);
          const double fxy = 0.25 * (f(x + 1, y + 1, c) - f(x + 1, y - 1, c) - f(x - 1, y + 1, c) +
                                     f(x - 1, y - 1, c));
          m = std::sqrt(fxx * fxx + 4.0 * fxy * fxy + fyy * fyy);
        }
        out.at(x, y, c) = m;
      }
    }
  }
  return out;
}

}  // namespace illumkit::detail
