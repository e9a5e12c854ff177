#pragma once

#include <limits>

#include "mfsr/image.hpp"

namespace mfsr {

/// Returned by psnr() for identical images.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
};

/// 10 log10(peak^2 / MSE). Throws std::invalid_argument on shape mismatch.
double psnr(const Image& a, const Image& b, double peak = 255.0);

/// Mean SSIM over the valid region of an 11x11 Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, dynamic range 255. Both images must be >= 11x11.
double ssim(const Image& a, const Image& b);

MetricReport compare(const Image& reference, const Image& test);

}  // namespace mfsr
