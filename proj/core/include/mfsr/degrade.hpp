#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mfsr/image.hpp"

namespace mfsr {

/// Sub-pixel translation of frame k, in HR pixels. Frame k samples the scene
/// at (x + dx, y + dy).
struct FrameMotion {
  double dx = 0.0;
  double dy = 0.0;

  friend bool operator==(const FrameMotion&, const FrameMotion&) = default;
};

/// Square, odd-sized convolution kernel whose taps sum to one.
class BlurKernel {
public:
  /// Validates shape and normalization (|sum - 1| <= 1e-12).
  BlurKernel(int size, std::vector<double> taps);

  static BlurKernel gaussian(int size, double sigma);
  static BlurKernel delta();

  int size() const noexcept { return size_; }
  int radius() const noexcept { return size_ / 2; }
  double tap(int a, int b) const noexcept { return taps_[static_cast<std::size_t>(b) * size_ + a]; }
  const std::vector<double>& taps() const noexcept { return taps_; }

private:
  int size_;
  std::vector<double> taps_;
};

/// A_k = D B M_k: bilinear warp, convolution, then decimation by `scale`
/// starting at `phase` (0 = top-left). Symmetric reflection at every border.
struct DegradationOperator {
  FrameMotion motion;
  BlurKernel blur = BlurKernel::delta();
  int scale = 4;
  int phase = 0;

  int lr_width(int hr_width) const { return hr_width / scale; }
  int lr_height(int hr_height) const { return hr_height / scale; }
};

// The three stages, each with its exact transpose.
Image warp(const Image& z, FrameMotion m);
Image warp_adjoint(const Image& r, FrameMotion m);
Image convolve(const Image& z, const BlurKernel& k);
Image convolve_adjoint(const Image& r, const BlurKernel& k);
Image decimate(const Image& z, int scale, int phase = 0);
Image decimate_adjoint(const Image& r, int scale, int hr_width, int hr_height, int phase = 0);

/// Throws std::invalid_argument when z's dimensions are not divisible by the scale.
Image apply(const DegradationOperator& op, const Image& z);

/// Exact adjoint of apply() for an HR grid of the given size.
Image apply_adjoint(const DegradationOperator& op, const Image& r, int hr_width, int hr_height);

/// apply() as explicit sparse rows, one per LR pixel, for repeated use on a
/// fixed HR grid. Rows are sorted by HR index with duplicates merged.
class SparseOperator {
public:
  SparseOperator(const DegradationOperator& op, int hr_width, int hr_height);

  /// out = A z.
  void apply(std::span<const double> z, std::span<double> out) const;
  /// out += A^T (w .* r); w may be empty for unit weights.
  void accumulate_adjoint(std::span<const double> r, std::span<const double> w,
                          std::span<double> out) const;

  int lr_width() const noexcept { return lr_width_; }
  int lr_height() const noexcept { return lr_height_; }
  std::size_t rows() const noexcept { return offsets_.size() - 1; }
  std::size_t nonzeros() const noexcept { return cols_.size(); }

private:
  int lr_width_;
  int lr_height_;
  std::size_t hr_size_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> cols_;
  std::vector<double> vals_;
};

struct Frame {
  Image image;
  FrameMotion motion;
};

/// K shifted, blurred, decimated, optionally noisy frames of z. Frame 0 is the
/// zero-shift reference; other shifts are uniform in [0, scale) per axis.
/// noise_var is a variance on the [0,1] intensity scale, so the added noise
/// has sigma = 255 * sqrt(noise_var) in pixel units.
std::vector<Frame> simulate_stack(const Image& z, int k, int scale, const BlurKernel& blur,
                                  double noise_var, std::uint64_t seed);

std::vector<DegradationOperator> make_operators(const std::vector<FrameMotion>& motions,
                                                const BlurKernel& blur, int scale);

/// Sidecar format: one "index dx dy" line per frame, full float precision.
void write_shifts(const std::vector<FrameMotion>& motions, const std::filesystem::path& path);
std::vector<FrameMotion> read_shifts(const std::filesystem::path& path);

}  // namespace mfsr
