#include "mfsr/resample.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mfsr {

double catmull_rom(double x) noexcept {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

namespace {

struct Taps {
  int first;
  std::array<double, 4> w;
};

std::vector<Taps> taps_for(int hr_len, int scale) {
  std::vector<Taps> taps(static_cast<std::size_t>(hr_len));
  for (int X = 0; X < hr_len; ++X) {
    const int i0 = X / scale;
    const double t = static_cast<double>(X - i0 * scale) / scale;
    taps[X].first = i0 - 1;
    for (int k = 0; k < 4; ++k) taps[X].w[k] = catmull_rom(t - (k - 1));
  }
  return taps;
}

}  // namespace

Image bicubic_upsample(const Image& lr, int scale) {
  if (scale < 1) throw std::invalid_argument("bicubic_upsample: scale must be >= 1");
  if (scale == 1) return lr;
  const int lw = lr.width(), lh = lr.height();
  const int hw = lw * scale, hh = lh * scale;
  const auto tx = taps_for(hw, scale);
  const auto ty = taps_for(hh, scale);

  Image rows(hw, lh);
  for (int y = 0; y < lh; ++y)
    for (int X = 0; X < hw; ++X) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += tx[X].w[k] * lr.at(reflect_index(tx[X].first + k, lw), y);
      rows.at(X, y) = acc;
    }
  Image out(hw, hh);
  for (int Y = 0; Y < hh; ++Y)
    for (int X = 0; X < hw; ++X) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += ty[Y].w[k] * rows.at(X, reflect_index(ty[Y].first + k, lh));
      out.at(X, Y) = acc;
    }
  return out;
}

}  // namespace mfsr
