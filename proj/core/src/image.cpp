#include "mfsr/image.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mfsr {

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw std::invalid_argument("Image: negative dimension");
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0) throw std::invalid_argument("Image: negative dimension");
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("Image: data length " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(width) + "x" +
                                std::to_string(height));
  }
}

bool Image::all_finite() const noexcept {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double dot(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("dot: image shape mismatch");
  return dot(a.pixels(), b.pixels());
}

double dot(const GradientField& a, const GradientField& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("dot: gradient shape mismatch");
  return dot(a.horiz, b.horiz) + dot(a.vert, b.vert);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Image axpy(const Image& a, double s, const Image& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("axpy: image shape mismatch");
  Image out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * b[i];
  return out;
}

Image operator+(const Image& a, const Image& b) { return axpy(a, 1.0, b); }
Image operator-(const Image& a, const Image& b) { return axpy(a, -1.0, b); }

Image operator*(double s, const Image& a) {
  Image out = a;
  for (double& v : out.pixels()) v *= s;
  return out;
}

}  // namespace mfsr
