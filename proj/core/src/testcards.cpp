#include "mfsr/testcards.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace mfsr {

namespace {

constexpr int kSuper = 4;

// f maps normalized coordinates (u, v) in [0,1)^2 to an intensity.
Image render(int w, int h, const std::function<double(double, double)>& f) {
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int sy = 0; sy < kSuper; ++sy)
        for (int sx = 0; sx < kSuper; ++sx) {
          const double u = (x + (sx + 0.5) / kSuper) / w;
          const double v = (y + (sy + 0.5) / kSuper) / h;
          acc += f(u, v);
        }
      img.at(x, y) = std::clamp(std::round(acc / (kSuper * kSuper)), 0.0, 255.0);
    }
  return img;
}

bool inside_rect(double u, double v, double x0, double y0, double x1, double y1) {
  return u >= x0 && u < x1 && v >= y0 && v < y1;
}

}  // namespace

const char* to_string(TestCard card) noexcept {
  switch (card) {
    case TestCard::rings: return "rings";
    case TestCard::blocks: return "blocks";
    case TestCard::disks: return "disks";
    case TestCard::bars: return "bars";
    case TestCard::checker: return "checker";
    case TestCard::roads: return "roads";
  }
  return "unknown";
}

Image make_test_card(TestCard card, int width, int height) {
  using std::numbers::pi;
  switch (card) {
    case TestCard::rings:
      return render(width, height, [](double u, double v) {
        const double r = std::hypot(u - 0.5, v - 0.5);
        return r < 0.42 ? (std::sin(2 * pi * r * 5.0) > 0 ? 200.0 : 60.0) : 120.0;
      });
    case TestCard::blocks:
      return render(width, height, [](double u, double v) {
        double val = 90.0 + 40.0 * u;
        if (inside_rect(u, v, 0.08, 0.10, 0.45, 0.38)) val = 210.0;
        if (inside_rect(u, v, 0.55, 0.08, 0.90, 0.30)) val = 40.0;
        if (inside_rect(u, v, 0.20, 0.50, 0.38, 0.90)) val = 170.0;
        if (inside_rect(u, v, 0.50, 0.45, 0.92, 0.62)) val = 230.0;
        if (inside_rect(u, v, 0.60, 0.70, 0.80, 0.92)) val = 20.0;
        return val;
      });
    case TestCard::disks:
      return render(width, height, [](double u, double v) {
        const double centers[][3] = {{0.25, 0.25, 0.15}, {0.70, 0.30, 0.12}, {0.35, 0.72, 0.18},
                                     {0.78, 0.75, 0.10}, {0.55, 0.52, 0.07}};
        double val = 70.0 + 60.0 * v;
        int idx = 0;
        for (const auto& c : centers) {
          if (std::hypot(u - c[0], v - c[1]) < c[2]) val = (idx % 2 == 0) ? 225.0 : 35.0;
          ++idx;
        }
        return val;
      });
    case TestCard::bars:
      return render(width, height, [](double u, double v) {
        const double t = std::cos(0.5) * u + std::sin(0.5) * v;
        const double period = 0.25 + 0.15 * v;
        return std::fmod(t + 10.0, period) < 0.5 * period ? 190.0 : 50.0;
      });
    case TestCard::checker:
      return render(width, height, [](double u, double v) {
        const double a = 0.35;
        const double s = std::cos(a) * (u - 0.5) - std::sin(a) * (v - 0.5);
        const double t = std::sin(a) * (u - 0.5) + std::cos(a) * (v - 0.5);
        const int cs = static_cast<int>(std::floor(s * 6.0)), ct = static_cast<int>(std::floor(t * 6.0));
        return ((cs + ct) & 1) ? 200.0 : 55.0;
      });
    case TestCard::roads:
      return render(width, height, [](double u, double v) {
        double val = 100.0 + 30.0 * std::sin(2 * pi * u) * std::cos(2 * pi * v);
        if (std::abs(v - 0.30 - 0.2 * u) < 0.05) val = 215.0;
        if (std::abs(u - 0.62) < 0.035) val = 200.0;
        if (std::abs(v - 0.78) < 0.02) val = 30.0;
        if (inside_rect(u, v, 0.12, 0.52, 0.40, 0.68)) val = 160.0;
        return val;
      });
  }
  return Image(width, height);
}

std::vector<std::pair<std::string, Image>> standard_test_cards(int size) {
  std::vector<std::pair<std::string, Image>> cards;
  for (auto c : {TestCard::rings, TestCard::blocks, TestCard::disks, TestCard::bars,
                 TestCard::checker, TestCard::roads})
    cards.emplace_back(std::string("card_") + to_string(c), make_test_card(c, size, size));
  return cards;
}

}  // namespace mfsr
