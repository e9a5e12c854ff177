#include "mfsr/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <numbers>
#include <stdexcept>

namespace mfsr {

namespace {

constexpr double kMadToSigma = 1.4826;

double median_of(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace

NormCurve NormCurve::default_curve() {
  const double mid = 0.5 * (kGammaLow + kGammaHigh);
  const double half = 0.5 * (kGammaHigh - kGammaLow);
  NormCurve c;
  c.b = 1.0 / half;
  c.c = -mid / half;
  c.a = 0.5 / std::atan(1.0);
  c.d = 1.5;
  return c;
}

double gaussian_raw_ratio() { return 2.0 / std::sqrt(std::numbers::pi); }

double laplacian_raw_ratio() { return std::numbers::sqrt2 / (kMadToSigma * std::numbers::ln2); }

double gamma_from_ratio(double raw_ratio) {
  const double rg = gaussian_raw_ratio(), rl = laplacian_raw_ratio();
  const double g = kGammaGaussian + (raw_ratio - rg) * (kGammaLaplacian - kGammaGaussian) / (rl - rg);
  return std::clamp(g, 0.001, 0.999);
}

std::vector<double> residuals(const std::vector<Image>& stack,
                              const std::vector<DegradationOperator>& ops, const Image& z) {
  if (stack.size() != ops.size())
    throw std::invalid_argument("residuals: frame count and operator count differ");
  std::vector<double> r;
  for (std::size_t k = 0; k < stack.size(); ++k) {
    const Image pred = apply(ops[k], z);
    if (!pred.same_shape(stack[k]))
      throw std::invalid_argument("residuals: frame " + std::to_string(k) +
                                  " does not match the operator output size");
    for (std::size_t i = 0; i < pred.size(); ++i) r.push_back(stack[k][i] - pred[i]);
  }
  return r;
}

NoiseStats estimate_noise(std::span<const double> r) {
  if (r.empty()) throw std::invalid_argument("estimate_noise: empty residual vector");
  std::vector<double> v(r.begin(), r.end());
  const double med = median_of(v);
  double abs_sum = 0.0;
  for (double& x : v) {
    x = std::abs(x - med);
    abs_sum += x;
  }
  NoiseStats s;
  s.sigma_g = kMadToSigma * median_of(v);
  s.sigma_l = std::numbers::sqrt2 * abs_sum / static_cast<double>(v.size());
  if (s.sigma_g > 0.0) {
    s.raw_ratio = s.sigma_l / s.sigma_g;
    s.gamma = gamma_from_ratio(s.raw_ratio);
  } else if (s.sigma_l > 0.0) {
    // More than half the residuals sit exactly on the median: impulsive.
    s.raw_ratio = std::numeric_limits<double>::infinity();
    s.gamma = gamma_from_ratio(s.raw_ratio);
  } else {
    s.gamma = kGammaGaussian;
  }
  return s;
}

double select_p(double gamma, const NormCurve& curve) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("select_p: gamma outside (0, 1)");
  if (gamma <= kGammaLow) return 1.0;
  if (gamma > kGammaHigh) return 2.0;
  return std::clamp(curve.a * std::atan(curve.b * gamma + curve.c) + curve.d, 1.0, 2.0);
}

double select_p(const NoiseStats& stats, const NormCurve& curve) { return select_p(stats.gamma, curve); }

double irn_weight(double x, double p, double epsilon) {
  const double ax = std::abs(x);
  return ax > epsilon ? std::pow(ax, p - 2.0) : std::pow(epsilon, p - 2.0);
}

std::vector<double> irn_weights(std::span<const double> r, double p, double epsilon) {
  std::vector<double> w(r.size());
  if (p == 2.0) {
    std::fill(w.begin(), w.end(), 1.0);
    return w;
  }
  const double floor_w = std::pow(epsilon, p - 2.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double ax = std::abs(r[i]);
    w[i] = ax > epsilon ? std::pow(ax, p - 2.0) : floor_w;
  }
  return w;
}

double smoothed_lp(double x, double p, double epsilon) {
  const double ax = std::abs(x);
  if (ax > epsilon) return std::pow(ax, p);
  return 0.5 * p * std::pow(epsilon, p - 2.0) * ax * ax + (1.0 - 0.5 * p) * std::pow(epsilon, p);
}

double lp_sum(std::span<const double> r, double p) {
  double s = 0.0;
  if (p == 2.0) {
    for (double x : r) s += x * x;
  } else if (p == 1.0) {
    for (double x : r) s += std::abs(x);
  } else {
    for (double x : r) s += std::pow(std::abs(x), p);
  }
  return s;
}

}  // namespace mfsr
