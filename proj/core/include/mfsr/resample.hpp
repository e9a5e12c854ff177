#pragma once

#include "mfsr/image.hpp"

namespace mfsr {

/// Catmull-Rom (a = -0.5) bicubic interpolation by an integer factor.
/// HR pixel X samples LR coordinate X / scale, the grid on which phase-0
/// decimation places LR samples. Reflective boundary.
Image bicubic_upsample(const Image& lr, int scale);

/// Catmull-Rom kernel value at distance x.
double catmull_rom(double x) noexcept;

}  // namespace mfsr
