#include "mfsr/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mfsr/random.hpp"

namespace mfsr {

namespace {

// Bilinear footprint of a constant shift: sample index floor(x + d) and weight
// of the right neighbour.
struct Footprint {
  int offset;
  double frac;
};

Footprint footprint(double d) {
  const double fl = std::floor(d);
  return {static_cast<int>(fl), d - fl};
}

void check_motion(FrameMotion m) {
  if (!std::isfinite(m.dx) || !std::isfinite(m.dy))
    throw std::invalid_argument("FrameMotion: non-finite shift");
}

}  // namespace

BlurKernel::BlurKernel(int size, std::vector<double> taps) : size_(size), taps_(std::move(taps)) {
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("BlurKernel: size must be odd and >= 1");
  if (taps_.size() != static_cast<std::size_t>(size) * size)
    throw std::invalid_argument("BlurKernel: expected size*size taps");
  double sum = 0.0;
  for (double t : taps_) {
    if (!std::isfinite(t)) throw std::invalid_argument("BlurKernel: non-finite tap");
    sum += t;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("BlurKernel: taps must sum to 1");
}

BlurKernel BlurKernel::gaussian(int size, double sigma) {
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("gaussian kernel: size must be odd");
  if (size == 1) return delta();
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian kernel: sigma must be positive");
  const int c = size / 2;
  std::vector<double> taps(static_cast<std::size_t>(size) * size);
  double sum = 0.0;
  for (int b = 0; b < size; ++b)
    for (int a = 0; a < size; ++a) {
      const double r2 = double((a - c) * (a - c) + (b - c) * (b - c));
      taps[static_cast<std::size_t>(b) * size + a] = std::exp(-r2 / (2.0 * sigma * sigma));
      sum += taps[static_cast<std::size_t>(b) * size + a];
    }
  for (double& t : taps) t /= sum;
  return BlurKernel(size, std::move(taps));
}

BlurKernel BlurKernel::delta() { return BlurKernel(1, {1.0}); }

Image warp(const Image& z, FrameMotion m) {
  check_motion(m);
  const int w = z.width(), h = z.height();
  const auto fx = footprint(m.dx), fy = footprint(m.dy);
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    const int y0 = reflect_index(y + fy.offset, h), y1 = reflect_index(y + fy.offset + 1, h);
    for (int x = 0; x < w; ++x) {
      const int x0 = reflect_index(x + fx.offset, w), x1 = reflect_index(x + fx.offset + 1, w);
      out.at(x, y) = (1 - fy.frac) * ((1 - fx.frac) * z.at(x0, y0) + fx.frac * z.at(x1, y0)) +
                     fy.frac * ((1 - fx.frac) * z.at(x0, y1) + fx.frac * z.at(x1, y1));
    }
  }
  return out;
}

Image warp_adjoint(const Image& r, FrameMotion m) {
  check_motion(m);
  const int w = r.width(), h = r.height();
  const auto fx = footprint(m.dx), fy = footprint(m.dy);
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    const int y0 = reflect_index(y + fy.offset, h), y1 = reflect_index(y + fy.offset + 1, h);
    for (int x = 0; x < w; ++x) {
      const int x0 = reflect_index(x + fx.offset, w), x1 = reflect_index(x + fx.offset + 1, w);
      const double v = r.at(x, y);
      out.at(x0, y0) += (1 - fy.frac) * (1 - fx.frac) * v;
      out.at(x1, y0) += (1 - fy.frac) * fx.frac * v;
      out.at(x0, y1) += fy.frac * (1 - fx.frac) * v;
      out.at(x1, y1) += fy.frac * fx.frac * v;
    }
  }
  return out;
}

Image convolve(const Image& z, const BlurKernel& k) {
  const int w = z.width(), h = z.height(), c = k.radius();
  if (k.size() == 1) return k.tap(0, 0) == 1.0 ? z : k.tap(0, 0) * z;
  Image out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int b = 0; b < k.size(); ++b) {
        const int sy = reflect_index(y - (b - c), h);
        for (int a = 0; a < k.size(); ++a)
          acc += k.tap(a, b) * z.at(reflect_index(x - (a - c), w), sy);
      }
      out.at(x, y) = acc;
    }
  return out;
}

Image convolve_adjoint(const Image& r, const BlurKernel& k) {
  const int w = r.width(), h = r.height(), c = k.radius();
  if (k.size() == 1) return k.tap(0, 0) == 1.0 ? r : k.tap(0, 0) * r;
  Image out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = r.at(x, y);
      for (int b = 0; b < k.size(); ++b) {
        const int sy = reflect_index(y - (b - c), h);
        for (int a = 0; a < k.size(); ++a)
          out.at(reflect_index(x - (a - c), w), sy) += k.tap(a, b) * v;
      }
    }
  return out;
}

Image decimate(const Image& z, int scale, int phase) {
  if (scale < 1) throw std::invalid_argument("decimate: scale must be >= 1");
  if (phase < 0 || phase >= scale) throw std::invalid_argument("decimate: phase outside [0, scale)");
  Image out(z.width() / scale, z.height() / scale);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out.at(x, y) = z.at(x * scale + phase, y * scale + phase);
  return out;
}

Image decimate_adjoint(const Image& r, int scale, int hr_width, int hr_height, int phase) {
  if (r.width() != hr_width / scale || r.height() != hr_height / scale)
    throw std::invalid_argument("decimate_adjoint: LR size does not match HR size / scale");
  Image out(hr_width, hr_height);
  for (int y = 0; y < r.height(); ++y)
    for (int x = 0; x < r.width(); ++x) out.at(x * scale + phase, y * scale + phase) = r.at(x, y);
  return out;
}

Image apply(const DegradationOperator& op, const Image& z) {
  if (op.scale < 1) throw std::invalid_argument("apply: scale must be >= 1");
  if (z.width() % op.scale != 0 || z.height() % op.scale != 0)
    throw std::invalid_argument("apply: HR size " + std::to_string(z.width()) + "x" +
                                std::to_string(z.height()) + " not divisible by scale " +
                                std::to_string(op.scale));
  return decimate(convolve(warp(z, op.motion), op.blur), op.scale, op.phase);
}

Image apply_adjoint(const DegradationOperator& op, const Image& r, int hr_width, int hr_height) {
  if (op.scale < 1 || hr_width % op.scale != 0 || hr_height % op.scale != 0)
    throw std::invalid_argument("apply_adjoint: HR size not divisible by scale");
  return warp_adjoint(
      convolve_adjoint(decimate_adjoint(r, op.scale, hr_width, hr_height, op.phase), op.blur),
      op.motion);
}

SparseOperator::SparseOperator(const DegradationOperator& op, int hr_width, int hr_height) {
  check_motion(op.motion);
  if (op.scale < 1 || hr_width % op.scale != 0 || hr_height % op.scale != 0)
    throw std::invalid_argument("SparseOperator: HR size not divisible by scale");
  if (op.phase < 0 || op.phase >= op.scale)
    throw std::invalid_argument("SparseOperator: phase outside [0, scale)");
  const int w = hr_width, h = hr_height, c = op.blur.radius();
  lr_width_ = w / op.scale;
  lr_height_ = h / op.scale;
  hr_size_ = static_cast<std::size_t>(w) * h;
  const auto fx = footprint(op.motion.dx), fy = footprint(op.motion.dy);
  offsets_.reserve(static_cast<std::size_t>(lr_width_) * lr_height_ + 1);
  offsets_.push_back(0);
  std::map<std::uint32_t, double> row;
  for (int i = 0; i < lr_height_; ++i)
    for (int j = 0; j < lr_width_; ++j) {
      row.clear();
      const int x = j * op.scale + op.phase, y = i * op.scale + op.phase;
      for (int b = 0; b < op.blur.size(); ++b) {
        const int sy = op.blur.size() == 1 ? y : reflect_index(y - (b - c), h);
        for (int a = 0; a < op.blur.size(); ++a) {
          const int sx = op.blur.size() == 1 ? x : reflect_index(x - (a - c), w);
          const double k = op.blur.tap(a, b);
          const int y0 = reflect_index(sy + fy.offset, h), y1 = reflect_index(sy + fy.offset + 1, h);
          const int x0 = reflect_index(sx + fx.offset, w), x1 = reflect_index(sx + fx.offset + 1, w);
          row[static_cast<std::uint32_t>(y0 * w + x0)] += k * (1 - fy.frac) * (1 - fx.frac);
          row[static_cast<std::uint32_t>(y0 * w + x1)] += k * (1 - fy.frac) * fx.frac;
          row[static_cast<std::uint32_t>(y1 * w + x0)] += k * fy.frac * (1 - fx.frac);
          row[static_cast<std::uint32_t>(y1 * w + x1)] += k * fy.frac * fx.frac;
        }
      }
      for (const auto& [col, v] : row) {
        if (v == 0.0) continue;
        cols_.push_back(col);
        vals_.push_back(v);
      }
      offsets_.push_back(cols_.size());
    }
}

void SparseOperator::apply(std::span<const double> z, std::span<double> out) const {
  if (z.size() != hr_size_ || out.size() != rows())
    throw std::invalid_argument("SparseOperator::apply: size mismatch");
  for (std::size_t r = 0; r < rows(); ++r) {
    double acc = 0.0;
    for (std::size_t e = offsets_[r]; e < offsets_[r + 1]; ++e) acc += vals_[e] * z[cols_[e]];
    out[r] = acc;
  }
}

void SparseOperator::accumulate_adjoint(std::span<const double> r, std::span<const double> w,
                                        std::span<double> out) const {
  if (r.size() != rows() || out.size() != hr_size_ || (!w.empty() && w.size() != rows()))
    throw std::invalid_argument("SparseOperator::accumulate_adjoint: size mismatch");
  for (std::size_t i = 0; i < rows(); ++i) {
    const double v = w.empty() ? r[i] : w[i] * r[i];
    if (v == 0.0) continue;
    for (std::size_t e = offsets_[i]; e < offsets_[i + 1]; ++e) out[cols_[e]] += vals_[e] * v;
  }
}

std::vector<Frame> simulate_stack(const Image& z, int k, int scale, const BlurKernel& blur,
                                  double noise_var, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("simulate_stack: need at least one frame");
  if (scale < 1 || z.width() % scale != 0 || z.height() % scale != 0)
    throw std::invalid_argument("simulate_stack: HR size not divisible by scale");
  if (!(noise_var >= 0.0)) throw std::invalid_argument("simulate_stack: negative noise variance");

  Rng rng(seed);
  const double sigma = 255.0 * std::sqrt(noise_var);
  std::vector<Frame> frames;
  frames.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    FrameMotion m;
    if (i > 0) {
      m.dx = rng.uniform(0.0, static_cast<double>(scale));
      m.dy = rng.uniform(0.0, static_cast<double>(scale));
    }
    Image y = apply(DegradationOperator{m, blur, scale, 0}, z);
    if (sigma > 0.0)
      for (double& v : y.pixels()) v += sigma * rng.normal();
    frames.push_back({std::move(y), m});
  }
  return frames;
}

std::vector<DegradationOperator> make_operators(const std::vector<FrameMotion>& motions,
                                                const BlurKernel& blur, int scale) {
  std::vector<DegradationOperator> ops;
  ops.reserve(motions.size());
  for (const auto& m : motions) ops.push_back({m, blur, scale, 0});
  return ops;
}

void write_shifts(const std::vector<FrameMotion>& motions, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  char line[128];
  for (std::size_t i = 0; i < motions.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu %.17g %.17g\n", i, motions[i].dx, motions[i].dy);
    out << line;
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<FrameMotion> read_shifts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open shifts file " + path.string());
  std::map<long, FrameMotion> by_index;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    long idx;
    FrameMotion m;
    std::string extra;
    if (!(ss >> idx >> m.dx >> m.dy) || (ss >> extra))
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected 'index dx dy'");
    if (!std::isfinite(m.dx) || !std::isfinite(m.dy))
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": non-finite shift");
    if (!by_index.emplace(idx, m).second)
      throw std::runtime_error(path.string() + ": duplicate frame index " + std::to_string(idx));
  }
  std::vector<FrameMotion> out;
  long expect = 0;
  for (const auto& [idx, m] : by_index) {
    if (idx != expect++)
      throw std::runtime_error(path.string() + ": frame indices must be 0..K-1 without gaps");
    out.push_back(m);
  }
  if (out.empty()) throw std::runtime_error(path.string() + ": no shifts");
  return out;
}

}  // namespace mfsr
