#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mfsr {

/// Single-channel raster, row-major, nominal range [0, 255].
///
/// Pixel storage is double precision so that operator adjoint identities can
/// be checked at 1e-10; the on-disk formats are 8-bit or float32.
class Image {
public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);
  Image(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int x, int y) noexcept { return data_[index(x, y)]; }
  double at(int x, int y) const noexcept { return data_[index(x, y)]; }
  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<double> pixels() noexcept { return data_; }
  std::span<const double> pixels() const noexcept { return data_; }
  std::vector<double>& vec() noexcept { return data_; }
  const std::vector<double>& vec() const noexcept { return data_; }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool all_finite() const noexcept;

  friend bool operator==(const Image&, const Image&) = default;

private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Horizontal (d/dx) and vertical (d/dy) planes of a gradient on one grid.
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> horiz;
  std::vector<double> vert;

  GradientField() = default;
  GradientField(int w, int h)
      : width(w), height(h), horiz(static_cast<std::size_t>(w) * h, 0.0),
        vert(static_cast<std::size_t>(w) * h, 0.0) {}

  std::size_t size() const noexcept { return horiz.size(); }
  bool same_shape(const Image& img) const noexcept {
    return width == img.width() && height == img.height();
  }

  friend bool operator==(const GradientField&, const GradientField&) = default;
};

/// Half-sample symmetric reflection of an index into [0, n): -1 -> 0, n -> n-1.
constexpr int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

double dot(std::span<const double> a, std::span<const double> b);
double dot(const Image& a, const Image& b);
double dot(const GradientField& a, const GradientField& b);
double norm2(std::span<const double> a);

/// a + s*b, elementwise; shapes must match.
Image axpy(const Image& a, double s, const Image& b);
Image operator+(const Image& a, const Image& b);
Image operator-(const Image& a, const Image& b);
Image operator*(double s, const Image& a);

}  // namespace mfsr
