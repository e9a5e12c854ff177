#include "mfsr/quality.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace mfsr {

namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

std::array<double, kWindow * kWindow> gaussian_window() {
  std::array<double, kWindow * kWindow> w{};
  const int c = kWindow / 2;
  double sum = 0.0;
  for (int y = 0; y < kWindow; ++y)
    for (int x = 0; x < kWindow; ++x) {
      const double r2 = double((x - c) * (x - c) + (y - c) * (y - c));
      w[y * kWindow + x] = std::exp(-r2 / (2.0 * kWindowSigma * kWindowSigma));
      sum += w[y * kWindow + x];
    }
  for (double& v : w) v /= sum;
  return w;
}

}  // namespace

double psnr(const Image& a, const Image& b, double peak) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr: image dimensions differ");
  if (a.empty()) throw std::invalid_argument("psnr: empty image");
  double sse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sse += d * d;
  }
  if (sse == 0.0) return kPsnrIdentical;
  const double mse = sse / static_cast<double>(a.size());
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("ssim: image dimensions differ");
  if (a.width() < kWindow || a.height() < kWindow)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  static const auto window = gaussian_window();

  const int ow = a.width() - kWindow + 1;
  const int oh = a.height() - kWindow + 1;
  double total = 0.0;
  for (int y0 = 0; y0 < oh; ++y0) {
    for (int x0 = 0; x0 < ow; ++x0) {
      double mx = 0, my = 0, exx = 0, eyy = 0, exy = 0;
      for (int dy = 0; dy < kWindow; ++dy)
        for (int dx = 0; dx < kWindow; ++dx) {
          const double w = window[dy * kWindow + dx];
          const double xa = a.at(x0 + dx, y0 + dy);
          const double xb = b.at(x0 + dx, y0 + dy);
          mx += w * xa;
          my += w * xb;
          exx += w * xa * xa;
          eyy += w * xb * xb;
          exy += w * xa * xb;
        }
      const double vx = exx - mx * mx;
      const double vy = eyy - my * my;
      const double cxy = exy - mx * my;
      const double num = (2.0 * mx * my + kC1) * (2.0 * cxy + kC2);
      const double den = (mx * mx + my * my + kC1) * (vx + vy + kC2);
      total += num / den;
    }
  }
  return total / (static_cast<double>(ow) * oh);
}

MetricReport compare(const Image& reference, const Image& test) {
  return {psnr(reference, test), ssim(reference, test)};
}

}  // namespace mfsr
