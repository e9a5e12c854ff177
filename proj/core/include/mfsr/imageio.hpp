#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfsr/image.hpp"

namespace mfsr {

enum class IoErrc {
  open_failed,
  unsupported_magic,
  malformed_header,
  truncated_payload,
  dimension_mismatch,
  write_failed,
};

const char* to_string(IoErrc code) noexcept;

class IoError : public std::runtime_error {
public:
  IoError(IoErrc code, const std::string& what);
  IoErrc code() const noexcept { return code_; }

private:
  IoErrc code_;
};

enum class ImageFormat { pgm, imgf };

/// Reads binary PGM (P5, maxval 255) or IMGF; the format is sniffed from the
/// magic bytes, not the extension.
Image read_image(const std::filesystem::path& path);

/// PGM output clamps to [0, 255] and rounds half away from zero.
void write_image(const Image& img, const std::filesystem::path& path,
                 ImageFormat format = ImageFormat::pgm);

/// Picks IMGF for a ".imgf" extension, PGM otherwise.
ImageFormat format_for(const std::filesystem::path& path);

/// One channel for P5/IMGF, three (R, G, B) for binary PPM (P6).
std::vector<Image> read_channels(const std::filesystem::path& path);
/// One channel goes through write_image; three are written as P6.
void write_channels(const std::vector<Image>& channels, const std::filesystem::path& path,
                    ImageFormat format = ImageFormat::pgm);

/// GRDF: "GRDF", u32 width, u32 height, u32 channels (= 2), horiz plane,
/// vert plane; all little-endian, planes as float32 row-major.
GradientField read_gradient_field(const std::filesystem::path& path);
GradientField read_gradient_field(const std::filesystem::path& path, int expected_width,
                                  int expected_height);
void write_gradient_field(const GradientField& field, const std::filesystem::path& path);

/// Clamp to [0,255] and round, the same mapping PGM output applies.
Image quantize_8bit(const Image& img);

}  // namespace mfsr
