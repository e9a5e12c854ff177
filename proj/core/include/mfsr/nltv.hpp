#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfsr/image.hpp"

namespace mfsr {

struct NonLocalEdge {
  std::uint32_t index;  // neighbour pixel j
  double weight;        // w_ij in (0, 1]

  friend bool operator==(const NonLocalEdge&, const NonLocalEdge&) = default;
};

/// Per-pixel lists of the most similar patches inside a search window, CSR layout.
/// Weights are those computed from pixel i's own search and are not symmetrized.
class NonLocalGraph {
public:
  NonLocalGraph() = default;
  NonLocalGraph(int width, int height, std::vector<std::size_t> offsets,
                std::vector<NonLocalEdge> edges);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::span<const NonLocalEdge> neighbors(std::size_t i) const noexcept {
    return {edges_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::size_t offset(std::size_t i) const noexcept { return offsets_[i]; }
  const std::vector<NonLocalEdge>& edges() const noexcept { return edges_; }

  friend bool operator==(const NonLocalGraph&, const NonLocalGraph&) = default;

private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<NonLocalEdge> edges_;
};

/// One value per graph edge, in edge order.
struct NonLocalField {
  std::vector<double> values;
};

struct NltvConfig {
  int patch_radius = 3;
  int window_radius = 10;
  int num_neighbors = 10;
  double eta = 0.0;  // <= 0 means estimate from the residual noise level
  double eta_floor = 1.0;
  int rebuild_every = 5;
};

/// Squared patch distances use a normalized Gaussian weighting of the
/// (2r+1)^2 patch with sigma = patch_radius / 2; patch pixels outside the
/// image reflect. For every pixel the `num_neighbors` closest in-window
/// candidates are kept (ties broken by scan order) with
/// w = exp(-dist / (2 eta^2)).
NonLocalGraph build_graph(const Image& img, int patch_radius, int window_radius, int num_neighbors,
                          double eta);

/// Normalized Gaussian patch weights used by build_graph, row-major (2r+1)^2.
std::vector<double> patch_weights(int patch_radius);

/// Edge (i,j) -> (z_j - z_i) * sqrt(w_ij).
NonLocalField nl_gradient(const NonLocalGraph& graph, const Image& z);

/// Negative adjoint of nl_gradient: <nl_gradient(z), f> = -<z, nl_divergence(f)>.
Image nl_divergence(const NonLocalGraph& graph, const NonLocalField& f);

/// Sum of |nl_gradient(z)|.
double nltv_value(const NonLocalGraph& graph, const Image& z);

}  // namespace mfsr
