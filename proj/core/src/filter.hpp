#pragma once

// Internal spatial filtering used by the estimators and metrics.

#include <vector>

#include "illumkit/image.hpp"

namespace illumkit::detail {

/// Symmetric border reflection (edge sample repeated): -1 -> 0, n -> n-1.
int reflect_index(int i, int n);

/// Sampled Gaussian, radius ceil(3 sigma), normalized to unit sum.
/// sigma == 0 yields the identity kernel {1}.
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur with reflected borders, per channel.
Image gaussian_blur(const Image& img, double sigma);

/// Per-channel magnitude of the n-th order spatial derivative computed with
/// central differences and reflected borders:
///   n = 0: |f|
///   n = 1: sqrt(fx^2 + fy^2)
///   n = 2: sqrt(fxx^2 + 4 fxy^2 + fyy^2)
Image derivative_magnitude(const Image& img, int order);

}  // namespace illumkit::detail
