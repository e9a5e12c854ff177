#include "mfsr/nltv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace mfsr {

NonLocalGraph::NonLocalGraph(int width, int height, std::vector<std::size_t> offsets,
                             std::vector<NonLocalEdge> edges)
    : width_(width), height_(height), offsets_(std::move(offsets)), edges_(std::move(edges)) {
  if (offsets_.size() != static_cast<std::size_t>(width) * height + 1 || offsets_.front() != 0 ||
      offsets_.back() != edges_.size())
    throw std::invalid_argument("NonLocalGraph: inconsistent offsets");
}

std::vector<double> patch_weights(int patch_radius) {
  const int side = 2 * patch_radius + 1;
  const double sigma = 0.5 * patch_radius;
  std::vector<double> w(static_cast<std::size_t>(side) * side);
  double sum = 0.0;
  for (int b = -patch_radius; b <= patch_radius; ++b)
    for (int a = -patch_radius; a <= patch_radius; ++a) {
      const double v = std::exp(-double(a * a + b * b) / (2.0 * sigma * sigma));
      w[static_cast<std::size_t>(b + patch_radius) * side + (a + patch_radius)] = v;
      sum += v;
    }
  for (double& v : w) v /= sum;
  return w;
}

NonLocalGraph build_graph(const Image& img, int patch_radius, int window_radius, int num_neighbors,
                          double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("build_graph: eta must be positive");
  if (patch_radius < 1 || window_radius < 1)
    throw std::invalid_argument("build_graph: radii must be >= 1");
  if (num_neighbors < 1) throw std::invalid_argument("build_graph: need at least one neighbour");

  const int w = img.width(), h = img.height();
  const int pr = patch_radius, side = 2 * pr + 1;
  const int pw = w + 2 * pr;
  std::vector<double> padded(static_cast<std::size_t>(pw) * (h + 2 * pr));
  for (int y = -pr; y < h + pr; ++y)
    for (int x = -pr; x < w + pr; ++x)
      padded[static_cast<std::size_t>(y + pr) * pw + (x + pr)] =
          img.at(reflect_index(x, w), reflect_index(y, h));
  const auto gw = patch_weights(pr);
  const double inv2eta2 = 1.0 / (2.0 * eta * eta);

  std::vector<std::size_t> offsets{0};
  offsets.reserve(img.size() + 1);
  std::vector<NonLocalEdge> edges;
  edges.reserve(img.size() * static_cast<std::size_t>(num_neighbors));
  std::vector<std::pair<double, std::uint32_t>> cand;

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      cand.clear();
      const int y_lo = std::max(0, y - window_radius), y_hi = std::min(h - 1, y + window_radius);
      const int x_lo = std::max(0, x - window_radius), x_hi = std::min(w - 1, x + window_radius);
      for (int cy = y_lo; cy <= y_hi; ++cy)
        for (int cx = x_lo; cx <= x_hi; ++cx) {
          if (cx == x && cy == y) continue;
          double dist = 0.0;
          for (int b = 0; b < side; ++b) {
            const double* pi = &padded[static_cast<std::size_t>(y + b) * pw + x];
            const double* pj = &padded[static_cast<std::size_t>(cy + b) * pw + cx];
            const double* g = &gw[static_cast<std::size_t>(b) * side];
            for (int a = 0; a < side; ++a) {
              const double d = pi[a] - pj[a];
              dist += g[a] * d * d;
            }
          }
          cand.emplace_back(dist, static_cast<std::uint32_t>(img.index(cx, cy)));
        }
      const auto keep = std::min<std::size_t>(cand.size(), static_cast<std::size_t>(num_neighbors));
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep), cand.end());
      for (std::size_t k = 0; k < keep; ++k) {
        const double wij = std::max(std::exp(-cand[k].first * inv2eta2),
                                    std::numeric_limits<double>::min());
        edges.push_back({cand[k].second, wij});
      }
      offsets.push_back(edges.size());
    }
  return NonLocalGraph(w, h, std::move(offsets), std::move(edges));
}

NonLocalField nl_gradient(const NonLocalGraph& graph, const Image& z) {
  if (graph.width() != z.width() || graph.height() != z.height())
    throw std::invalid_argument("nl_gradient: graph and image dimensions differ");
  NonLocalField f{std::vector<double>(graph.edge_count())};
  for (std::size_t i = 0; i < graph.pixel_count(); ++i) {
    std::size_t e = graph.offset(i);
    for (const auto& nb : graph.neighbors(i)) f.values[e++] = (z[nb.index] - z[i]) * std::sqrt(nb.weight);
  }
  return f;
}

Image nl_divergence(const NonLocalGraph& graph, const NonLocalField& f) {
  if (f.values.size() != graph.edge_count())
    throw std::invalid_argument("nl_divergence: field not aligned with graph");
  Image out(graph.width(), graph.height());
  for (std::size_t i = 0; i < graph.pixel_count(); ++i) {
    std::size_t e = graph.offset(i);
    for (const auto& nb : graph.neighbors(i)) {
      const double v = std::sqrt(nb.weight) * f.values[e++];
      out[nb.index] -= v;
      out[i] += v;
    }
  }
  return out;
}

double nltv_value(const NonLocalGraph& graph, const Image& z) {
  if (graph.width() != z.width() || graph.height() != z.height())
    throw std::invalid_argument("nltv_value: graph and image dimensions differ");
  double total = 0.0;
  for (std::size_t i = 0; i < graph.pixel_count(); ++i)
    for (const auto& nb : graph.neighbors(i)) total += std::abs(z[nb.index] - z[i]) * std::sqrt(nb.weight);
  return total;
}

}  // namespace mfsr
