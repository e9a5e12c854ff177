#include "mfsr/gradient.hpp"

#include <cmath>
#include <stdexcept>

namespace mfsr {

GradientField discrete_gradient(const Image& img) {
  const int w = img.width(), h = img.height();
  GradientField g(w, h);
  for (int y = 0; y < h; ++y) {
    const int yp = reflect_index(y + 1, h), ym = reflect_index(y - 1, h);
    for (int x = 0; x < w; ++x) {
      const int xp = reflect_index(x + 1, w), xm = reflect_index(x - 1, w);
      const std::size_t i = img.index(x, y);
      g.horiz[i] = 0.5 * (img.at(xp, y) - img.at(xm, y));
      g.vert[i] = 0.5 * (img.at(x, yp) - img.at(x, ym));
    }
  }
  return g;
}

Image gradient_adjoint(const GradientField& field) {
  const int w = field.width, h = field.height;
  if (field.horiz.size() != static_cast<std::size_t>(w) * h || field.vert.size() != field.horiz.size())
    throw std::invalid_argument("gradient_adjoint: malformed field");
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    const int yp = reflect_index(y + 1, h), ym = reflect_index(y - 1, h);
    for (int x = 0; x < w; ++x) {
      const int xp = reflect_index(x + 1, w), xm = reflect_index(x - 1, w);
      const std::size_t i = out.index(x, y);
      const double gh = 0.5 * field.horiz[i], gv = 0.5 * field.vert[i];
      out.at(xp, y) += gh;
      out.at(xm, y) -= gh;
      out.at(x, yp) += gv;
      out.at(x, ym) -= gv;
    }
  }
  return out;
}

std::vector<double> magnitude(const GradientField& field) {
  std::vector<double> m(field.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::hypot(field.horiz[i], field.vert[i]);
  return m;
}

}  // namespace mfsr
