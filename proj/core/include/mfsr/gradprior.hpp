#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "mfsr/image.hpp"

namespace mfsr {

/// Generalized Gaussian profile model: sigma is the profile sharpness,
/// lambda the shape (2 = Gaussian, 1 = Laplacian).
struct GgdParams {
  double sigma = 1.0;
  double lambda = 1.6;
};

/// sqrt(Gamma(3/lambda) / Gamma(1/lambda)); makes the second moment sigma^2.
double ggd_alpha(double lambda);

/// h(x; sigma, lambda). Throws std::invalid_argument for sigma <= 0 or lambda <= 0.
double ggd_density(double x, GgdParams p);

/// h(d; sigma_hr) / h(d; sigma_lr), evaluated in closed form.
double transform_ratio(double d, double sigma_lr, double sigma_hr, double lambda);

/// sigma_hr = sigma_lr * (1 - exp(-mu * sigma_lr)).
double sharpened_sigma(double sigma_lr, double mu);

struct GptConfig {
  double lambda = 1.6;
  double mu = 0.9;
  double edge_percentile = 90.0;
  double max_trace_len = 8.0;
  double ratio_clamp_lo = 0.2;
  double ratio_clamp_hi = 5.0;
  double trace_step = 0.5;
  double stop_fraction = 0.1;
};

/// Per-pixel profile sharpness. sigma_lr > 0 exactly where edge_mask is set.
struct SharpnessMap {
  int width = 0;
  int height = 0;
  std::vector<double> sigma_lr;
  std::vector<char> edge_mask;

  std::size_t edge_count() const;
};

/// Gradient magnitude at the given percentile (0..100), linear interpolation
/// between order statistics.
double magnitude_percentile(const GradientField& grad, double percentile);

/// Edge pixels are local maxima of |g| along the gradient direction with
/// |g| > mag_threshold. Profiles are sampled bilinearly every trace_step
/// pixels on both sides until |g| drops below stop_fraction of the centre or
/// max_trace_len is reached; sigma is the root magnitude-weighted second
/// moment of distance.
SharpnessMap estimate_sharpness(const GradientField& grad, double mag_threshold,
                                double max_trace_len);
SharpnessMap estimate_sharpness(const GradientField& grad, double mag_threshold,
                                const GptConfig& cfg);

/// Scales each pixel on a traced profile by r(d), d being the distance along
/// the gradient direction to the profile's edge pixel; pixels not reached
/// from any edge keep ratio 1. Ratios are clamped to
/// [ratio_clamp_lo, ratio_clamp_hi].
GradientField sharpen_gradient(const GradientField& grad, const SharpnessMap& sharpness,
                               const GptConfig& cfg);
GradientField sharpen_gradient(const GradientField& grad, const SharpnessMap& sharpness,
                               double mu, double lambda);

/// Full transformation: percentile threshold, sharpness estimate, sharpening.
GradientField gradient_profile_transform(const GradientField& grad, const GptConfig& cfg);

enum class GradientSourceKind { internal_gpt, external_file, external_file_plus_gpt };

const char* to_string(GradientSourceKind kind) noexcept;

struct GradientSource {
  GradientSourceKind kind = GradientSourceKind::internal_gpt;
  std::filesystem::path file;
};

/// HR guidance field G.
///   internal_gpt           transform(grad(bicubic(reference_lr)))
///   external_file          the GRDF contents verbatim
///   external_file_plus_gpt transform(GRDF contents)
/// External fields must be exactly scale x the reference dimensions.
GradientField build_guidance(const GradientSource& source, const Image& reference_lr, int scale,
                             const GptConfig& cfg);

/// Same as above with an already-loaded external field.
GradientField build_guidance(GradientSourceKind kind, const std::optional<GradientField>& external,
                             const Image& reference_lr, int scale, const GptConfig& cfg);

/// grad(bicubic_upsample(reference_lr, scale)), the untransformed internal field.
GradientField upsampled_gradient(const Image& reference_lr, int scale);

}  // namespace mfsr
