#include "mfsr/gradprior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mfsr/gradient.hpp"
#include "mfsr/imageio.hpp"
#include "mfsr/resample.hpp"

namespace mfsr {

namespace {

constexpr double kMinMagnitude = 1e-9;
// cos(45 deg): an edge pixel only claims a profile pixel whose gradient
// points the same way.
constexpr double kDirectionAgreement = 0.7071067811865476;
// Bilinear sampling wobbles on oblique edges; a trace still counts as rising
// while it stays above this fraction of its running maximum.
constexpr double kUphillTolerance = 0.9;

double sample_bilinear(const std::vector<double>& m, int w, int h, double x, double y) {
  const double fx = std::floor(x), fy = std::floor(y);
  const double ax = x - fx, ay = y - fy;
  const int x0 = reflect_index(static_cast<int>(fx), w), x1 = reflect_index(static_cast<int>(fx) + 1, w);
  const int y0 = reflect_index(static_cast<int>(fy), h), y1 = reflect_index(static_cast<int>(fy) + 1, h);
  auto at = [&](int xx, int yy) { return m[static_cast<std::size_t>(yy) * w + xx]; };
  return (1 - ay) * ((1 - ax) * at(x0, y0) + ax * at(x1, y0)) +
         ay * ((1 - ax) * at(x0, y1) + ax * at(x1, y1));
}

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

}  // namespace

double ggd_alpha(double lambda) {
  check_positive(lambda, "GGD lambda");
  return std::sqrt(std::tgamma(3.0 / lambda) / std::tgamma(1.0 / lambda));
}

double ggd_density(double x, GgdParams p) {
  check_positive(p.sigma, "GGD sigma");
  const double a = ggd_alpha(p.lambda);
  const double norm = p.lambda * a / (2.0 * p.sigma * std::tgamma(1.0 / p.lambda));
  return norm * std::exp(-std::pow(a * std::abs(x / p.sigma), p.lambda));
}

double transform_ratio(double d, double sigma_lr, double sigma_hr, double lambda) {
  check_positive(sigma_lr, "sigma_lr");
  check_positive(sigma_hr, "sigma_hr");
  if (sigma_lr == sigma_hr) return 1.0;
  const double a = ggd_alpha(lambda);
  const double ad = a * std::abs(d);
  return (sigma_lr / sigma_hr) *
         std::exp(-std::pow(ad / sigma_hr, lambda) + std::pow(ad / sigma_lr, lambda));
}

double sharpened_sigma(double sigma_lr, double mu) {
  return sigma_lr * (1.0 - std::exp(-mu * sigma_lr));
}

std::size_t SharpnessMap::edge_count() const {
  return static_cast<std::size_t>(std::count(edge_mask.begin(), edge_mask.end(), 1));
}

double magnitude_percentile(const GradientField& grad, double percentile) {
  auto m = magnitude(grad);
  if (m.empty()) return 0.0;
  std::sort(m.begin(), m.end());
  const double pos = std::clamp(percentile, 0.0, 100.0) / 100.0 * static_cast<double>(m.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, m.size() - 1);
  return m[lo] + (pos - static_cast<double>(lo)) * (m[hi] - m[lo]);
}

SharpnessMap estimate_sharpness(const GradientField& grad, double mag_threshold,
                                double max_trace_len) {
  GptConfig cfg;
  cfg.max_trace_len = max_trace_len;
  return estimate_sharpness(grad, mag_threshold, cfg);
}

SharpnessMap estimate_sharpness(const GradientField& grad, double mag_threshold,
                                const GptConfig& cfg) {
  const int w = grad.width, h = grad.height;
  const auto m = magnitude(grad);
  SharpnessMap out{w, h, std::vector<double>(m.size(), 0.0), std::vector<char>(m.size(), 0)};
  const double floor_mag = std::max(mag_threshold, kMinMagnitude);

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double m0 = m[i];
      if (!(m0 > floor_mag)) continue;
      const double nx = grad.horiz[i] / m0, ny = grad.vert[i] / m0;
      // Ties go to the pixel on the negative side so a flat two-pixel crest
      // yields one edge pixel.
      if (m0 <= sample_bilinear(m, w, h, x + nx, y + ny) ||
          m0 < sample_bilinear(m, w, h, x - nx, y - ny))
        continue;

      double mass = m0, moment = 0.0;
      for (const double dir : {1.0, -1.0}) {
        for (double t = cfg.trace_step; t <= cfg.max_trace_len + 1e-12; t += cfg.trace_step) {
          const double mt = sample_bilinear(m, w, h, x + dir * t * nx, y + dir * t * ny);
          if (mt < cfg.stop_fraction * m0) break;
          mass += mt;
          moment += mt * t * t;
        }
      }
      out.edge_mask[i] = 1;
      out.sigma_lr[i] = std::max(std::sqrt(moment / mass), 0.5 * cfg.trace_step);
    }
  return out;
}

GradientField sharpen_gradient(const GradientField& grad, const SharpnessMap& sharpness,
                               const GptConfig& cfg) {
  const int w = grad.width, h = grad.height;
  if (sharpness.width != w || sharpness.height != h || sharpness.edge_mask.size() != grad.size())
    throw std::invalid_argument("sharpen_gradient: sharpness map does not match gradient field");
  const auto m = magnitude(grad);
  GradientField out = grad;
  if (sharpness.edge_count() == 0) return out;

  auto edge_at = [&](double px, double py, double nx, double ny) -> std::ptrdiff_t {
    const int ex = static_cast<int>(std::lround(px)), ey = static_cast<int>(std::lround(py));
    if (ex < 0 || ey < 0 || ex >= w || ey >= h) return -1;
    const std::size_t j = static_cast<std::size_t>(ey) * w + ex;
    if (!sharpness.edge_mask[j]) return -1;
    const double cosang = (grad.horiz[j] * nx + grad.vert[j] * ny) / m[j];
    return cosang >= kDirectionAgreement ? static_cast<std::ptrdiff_t>(j) : -1;
  };

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!(m[i] > kMinMagnitude)) continue;
      std::ptrdiff_t edge = sharpness.edge_mask[i] ? static_cast<std::ptrdiff_t>(i) : -1;
      double d = 0.0;
      if (edge < 0) {
        // A pixel belongs to an edge's profile when the magnitude rises
        // along the trace all the way to that edge pixel.
        const double nx = grad.horiz[i] / m[i], ny = grad.vert[i] / m[i];
        bool alive[2] = {true, true};
        double prev[2] = {m[i], m[i]};
        for (double t = cfg.trace_step; t <= cfg.max_trace_len + 1e-12 && edge < 0; t += cfg.trace_step) {
          for (int k = 0; k < 2 && edge < 0; ++k) {
            if (!alive[k]) continue;
            const double dir = k == 0 ? 1.0 : -1.0;
            const double px = x + dir * t * nx, py = y + dir * t * ny;
            const double mt = sample_bilinear(m, w, h, px, py);
            if (mt < kUphillTolerance * prev[k]) {
              alive[k] = false;
              continue;
            }
            prev[k] = std::max(prev[k], mt);
            const std::ptrdiff_t j = edge_at(px, py, nx, ny);
            if (j >= 0 && m[i] >= cfg.stop_fraction * m[static_cast<std::size_t>(j)]) {
              edge = j;
              d = t;
            }
          }
          if (!alive[0] && !alive[1]) break;
        }
      }
      if (edge < 0) continue;
      const double s_lr = sharpness.sigma_lr[static_cast<std::size_t>(edge)];
      const double s_hr = sharpened_sigma(s_lr, cfg.mu);
      if (!(s_hr > 0.0)) continue;
      const double r = std::clamp(transform_ratio(d, s_lr, s_hr, cfg.lambda), cfg.ratio_clamp_lo,
                                  cfg.ratio_clamp_hi);
      out.horiz[i] *= r;
      out.vert[i] *= r;
    }
  return out;
}

GradientField sharpen_gradient(const GradientField& grad, const SharpnessMap& sharpness, double mu,
                               double lambda) {
  GptConfig cfg;
  cfg.mu = mu;
  cfg.lambda = lambda;
  return sharpen_gradient(grad, sharpness, cfg);
}

GradientField gradient_profile_transform(const GradientField& grad, const GptConfig& cfg) {
  const double threshold = magnitude_percentile(grad, cfg.edge_percentile);
  return sharpen_gradient(grad, estimate_sharpness(grad, threshold, cfg), cfg);
}

const char* to_string(GradientSourceKind kind) noexcept {
  switch (kind) {
    case GradientSourceKind::internal_gpt: return "internal-gpt";
    case GradientSourceKind::external_file: return "external-file";
    case GradientSourceKind::external_file_plus_gpt: return "external-file-plus-gpt";
  }
  return "unknown";
}

GradientField upsampled_gradient(const Image& reference_lr, int scale) {
  return discrete_gradient(bicubic_upsample(reference_lr, scale));
}

GradientField build_guidance(const GradientSource& source, const Image& reference_lr, int scale,
                             const GptConfig& cfg) {
  std::optional<GradientField> external;
  if (source.kind != GradientSourceKind::internal_gpt) {
    if (source.file.empty())
      throw std::invalid_argument(std::string("gradient source ") + to_string(source.kind) +
                                  " needs a GRDF file");
    external = read_gradient_field(source.file, reference_lr.width() * scale,
                                   reference_lr.height() * scale);
  }
  return build_guidance(source.kind, external, reference_lr, scale, cfg);
}

GradientField build_guidance(GradientSourceKind kind, const std::optional<GradientField>& external,
                             const Image& reference_lr, int scale, const GptConfig& cfg) {
  if (kind == GradientSourceKind::internal_gpt)
    return gradient_profile_transform(upsampled_gradient(reference_lr, scale), cfg);

  if (!external)
    throw std::invalid_argument(std::string("gradient source ") + to_string(kind) +
                                " needs an external gradient field");
  if (external->width != reference_lr.width() * scale ||
      external->height != reference_lr.height() * scale)
    throw IoError(IoErrc::dimension_mismatch,
                  "external gradient field is " + std::to_string(external->width) + "x" +
                      std::to_string(external->height) + ", expected " +
                      std::to_string(reference_lr.width() * scale) + "x" +
                      std::to_string(reference_lr.height() * scale));
  if (kind == GradientSourceKind::external_file) return *external;
  return gradient_profile_transform(*external, cfg);
}

}  // namespace mfsr
