#pragma once

#include "mfsr/image.hpp"

namespace mfsr {

/// Central differences [-1/2, 0, 1/2] along x and y, symmetric boundary.
GradientField discrete_gradient(const Image& img);

/// Exact transpose of discrete_gradient: <grad z, g> == <z, gradient_adjoint(g)>.
Image gradient_adjoint(const GradientField& field);

/// Pointwise magnitude sqrt(h^2 + v^2).
std::vector<double> magnitude(const GradientField& field);

}  // namespace mfsr
