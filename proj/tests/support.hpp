#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>

#include <unistd.h>

#include "mfsr/image.hpp"
#include "mfsr/random.hpp"

namespace mfsr::testing {

inline Image random_image(int w, int h, Rng& rng, double lo = 0.0, double hi = 255.0) {
  Image img(w, h);
  for (double& v : img.pixels()) v = rng.uniform(lo, hi);
  return img;
}

inline GradientField random_field(int w, int h, Rng& rng, double scale = 50.0) {
  GradientField g(w, h);
  for (auto& v : g.horiz) v = rng.uniform(-scale, scale);
  for (auto& v : g.vert) v = rng.uniform(-scale, scale);
  return g;
}

inline Eigen::VectorXd to_vector(const Image& img) {
  return Eigen::Map<const Eigen::VectorXd>(img.vec().data(), static_cast<Eigen::Index>(img.size()));
}

// Columns are f(e_j) for the unit basis of a w x h input grid.
inline Eigen::MatrixXd dense_matrix(const std::function<Image(const Image&)>& f, int w, int h) {
  const auto n = static_cast<Eigen::Index>(w) * h;
  Eigen::MatrixXd m;
  for (Eigen::Index j = 0; j < n; ++j) {
    Image e(w, h);
    e[static_cast<std::size_t>(j)] = 1.0;
    const Image col = f(e);
    if (j == 0) m.resize(static_cast<Eigen::Index>(col.size()), n);
    m.col(j) = to_vector(col);
  }
  return m;
}

inline double rel_gap(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

inline double max_abs_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

class TempDir {
public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("mfsr_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

}  // namespace mfsr::testing
