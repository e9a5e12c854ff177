#pragma once

#include <span>
#include <vector>

#include "mfsr/degrade.hpp"
#include "mfsr/image.hpp"

namespace mfsr {

/// Robust scale estimates of a residual vector and the derived mixing ratio.
struct NoiseStats {
  double sigma_g = 0.0;    // 1.4826 * MAD
  double sigma_l = 0.0;    // sqrt(2) * mean |r - median|
  double raw_ratio = 0.0;  // sigma_l / sigma_g (0 when degenerate)
  double gamma = 0.0;      // raw_ratio mapped into (0, 1)
};

/// p(gamma) = a * atan(b * gamma + c) + d on the middle branch.
struct NormCurve {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  /// Arctangent through p(0.112) = 1 and p(0.798) = 2, point-symmetric about
  /// gamma = 0.455 (p = 1.5), with the argument reaching +-1 at the knots.
  static NormCurve default_curve();
};

inline constexpr double kGammaLow = 0.112;
inline constexpr double kGammaHigh = 0.798;

/// Calibration of raw_ratio onto gamma: a pure Gaussian residual has
/// raw_ratio 2/sqrt(pi) and maps to kGammaGaussian; a pure Laplacian has
/// raw_ratio sqrt(2)/(1.4826 ln 2) and maps to kGammaLaplacian. Linear in
/// between and beyond, then clamped to [0.001, 0.999].
inline constexpr double kGammaGaussian = 0.95;
inline constexpr double kGammaLaplacian = 0.05;
double gaussian_raw_ratio();
double laplacian_raw_ratio();
double gamma_from_ratio(double raw_ratio);

/// Concatenation over frames of y_k - A_k z.
std::vector<double> residuals(const std::vector<Image>& stack,
                              const std::vector<DegradationOperator>& ops, const Image& z);

/// Throws std::invalid_argument on an empty vector. All-equal input yields
/// zero scales and gamma = kGammaGaussian.
NoiseStats estimate_noise(std::span<const double> r);

/// Piecewise norm exponent; throws for gamma outside (0, 1).
double select_p(const NoiseStats& stats, const NormCurve& curve = NormCurve::default_curve());
double select_p(double gamma, const NormCurve& curve = NormCurve::default_curve());

/// phi(x) = |x|^(p-2) for |x| > eps, eps^(p-2) otherwise.
double irn_weight(double x, double p, double epsilon);
std::vector<double> irn_weights(std::span<const double> r, double p, double epsilon);

/// |x|^p above eps; below it the quadratic that touches |x|^p at +-eps and
/// shares its curvature surrogate, so IRN steps majorize it exactly.
double smoothed_lp(double x, double p, double epsilon);

/// Sum |r_i|^p.
double lp_sum(std::span<const double> r, double p);

}  // namespace mfsr
