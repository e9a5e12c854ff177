#include "mfsr/imageio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <vector>

namespace mfsr {

namespace {

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoErrc::open_failed, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t load_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32le(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<unsigned char>((v >> s) & 0xffu));
}

float load_f32le(const unsigned char* p) { return std::bit_cast<float>(load_u32le(p)); }

void store_f32le(std::vector<unsigned char>& out, float v) {
  store_u32le(out, std::bit_cast<std::uint32_t>(v));
}

void spit(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoErrc::write_failed, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(IoErrc::write_failed, "write failed for " + path.string());
}

struct PgmCursor {
  const std::vector<unsigned char>& buf;
  std::size_t pos = 2;

  void skip_space_and_comments() {
    while (pos < buf.size()) {
      if (std::isspace(buf[pos])) {
        ++pos;
      } else if (buf[pos] == '#') {
        while (pos < buf.size() && buf[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  }

  long read_uint(const char* what) {
    skip_space_and_comments();
    if (pos >= buf.size() || !std::isdigit(buf[pos]))
      throw IoError(IoErrc::malformed_header, std::string("PGM header: expected ") + what);
    long v = 0;
    while (pos < buf.size() && std::isdigit(buf[pos])) {
      v = v * 10 + (buf[pos] - '0');
      if (v > (1L << 30)) throw IoError(IoErrc::malformed_header, "PGM header: value too large");
      ++pos;
    }
    return v;
  }
};

std::vector<Image> parse_pnm(const std::vector<unsigned char>& buf, const std::filesystem::path& path,
                             int channels) {
  PgmCursor cur{buf};
  const long w = cur.read_uint("width");
  const long h = cur.read_uint("height");
  const long maxval = cur.read_uint("maxval");
  if (w <= 0 || h <= 0) throw IoError(IoErrc::malformed_header, "PGM header: zero dimension");
  if (maxval < 1 || maxval > 255)
    throw IoError(IoErrc::malformed_header,
                  "PGM header: maxval " + std::to_string(maxval) + " is not 8-bit");
  if (cur.pos >= buf.size() || !std::isspace(buf[cur.pos]))
    throw IoError(IoErrc::malformed_header, "PGM header: missing separator before payload");
  ++cur.pos;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t need = n * static_cast<std::size_t>(channels);
  if (buf.size() - cur.pos < need)
    throw IoError(IoErrc::truncated_payload, path.string() + ": payload has " +
                                                 std::to_string(buf.size() - cur.pos) +
                                                 " bytes, expected " + std::to_string(need));
  const double scale = 255.0 / static_cast<double>(maxval);
  std::vector<Image> out;
  for (int c = 0; c < channels; ++c) {
    std::vector<double> px(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = buf[cur.pos + i * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)];
      px[i] = maxval == 255 ? v : v * scale;
    }
    out.emplace_back(static_cast<int>(w), static_cast<int>(h), std::move(px));
  }
  return out;
}

Image parse_imgf(const std::vector<unsigned char>& buf, const std::filesystem::path& path) {
  if (buf.size() < 12) throw IoError(IoErrc::malformed_header, "IMGF header shorter than 12 bytes");
  const std::uint32_t w = load_u32le(buf.data() + 4);
  const std::uint32_t h = load_u32le(buf.data() + 8);
  if (w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20))
    throw IoError(IoErrc::malformed_header, "IMGF header: implausible dimensions");
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (buf.size() - 12 < n * 4)
    throw IoError(IoErrc::truncated_payload, path.string() + ": IMGF payload truncated");
  std::vector<double> px(n);
  for (std::size_t i = 0; i < n; ++i) {
    px[i] = load_f32le(buf.data() + 12 + 4 * i);
    if (!std::isfinite(px[i]))
      throw IoError(IoErrc::malformed_header, path.string() + ": non-finite pixel in IMGF payload");
  }
  return Image(static_cast<int>(w), static_cast<int>(h), std::move(px));
}

unsigned char to_byte(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("write_image: non-finite pixel");
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 255.0)));
}

}  // namespace

const char* to_string(IoErrc code) noexcept {
  switch (code) {
    case IoErrc::open_failed: return "open failed";
    case IoErrc::unsupported_magic: return "unsupported magic";
    case IoErrc::malformed_header: return "malformed header";
    case IoErrc::truncated_payload: return "truncated payload";
    case IoErrc::dimension_mismatch: return "dimension mismatch";
    case IoErrc::write_failed: return "write failed";
  }
  return "unknown";
}

IoError::IoError(IoErrc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

Image read_image(const std::filesystem::path& path) {
  const auto buf = slurp(path);
  if (buf.size() >= 2 && buf[0] == 'P' && buf[1] == '5') return std::move(parse_pnm(buf, path, 1).front());
  if (buf.size() >= 4 && std::equal(buf.begin(), buf.begin() + 4, "IMGF"))
    return parse_imgf(buf, path);
  throw IoError(IoErrc::unsupported_magic, path.string() + " is neither P5 PGM nor IMGF");
}

ImageFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".imgf" ? ImageFormat::imgf : ImageFormat::pgm;
}

void write_image(const Image& img, const std::filesystem::path& path, ImageFormat format) {
  if (img.width() <= 0 || img.height() <= 0) throw std::invalid_argument("write_image: empty image");
  std::vector<unsigned char> out;
  if (format == ImageFormat::pgm) {
    const std::string header =
        "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    out.reserve(header.size() + img.size());
    out.insert(out.end(), header.begin(), header.end());
    for (double v : img.pixels()) out.push_back(to_byte(v));
  } else {
    out = {'I', 'M', 'G', 'F'};
    out.reserve(12 + 4 * img.size());
    store_u32le(out, static_cast<std::uint32_t>(img.width()));
    store_u32le(out, static_cast<std::uint32_t>(img.height()));
    for (double v : img.pixels()) {
      if (!std::isfinite(v)) throw std::invalid_argument("write_image: non-finite pixel");
      store_f32le(out, static_cast<float>(v));
    }
  }
  spit(path, out);
}

std::vector<Image> read_channels(const std::filesystem::path& path) {
  const auto buf = slurp(path);
  if (buf.size() >= 2 && buf[0] == 'P' && buf[1] == '6') return parse_pnm(buf, path, 3);
  return {read_image(path)};
}

void write_channels(const std::vector<Image>& channels, const std::filesystem::path& path,
                    ImageFormat format) {
  if (channels.size() == 1) {
    write_image(channels.front(), path, format);
    return;
  }
  if (channels.size() != 3) throw std::invalid_argument("write_channels: need 1 or 3 channels");
  if (format != ImageFormat::pgm)
    throw std::invalid_argument("write_channels: colour output is 8-bit PPM only");
  const Image& r = channels[0];
  for (const auto& c : channels)
    if (!c.same_shape(r)) throw std::invalid_argument("write_channels: channel size mismatch");
  const std::string header =
      "P6\n" + std::to_string(r.width()) + " " + std::to_string(r.height()) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(header.size() + 3 * r.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    for (const auto& c : channels) out.push_back(to_byte(c[i]));
  spit(path, out);
}

GradientField read_gradient_field(const std::filesystem::path& path) {
  const auto buf = slurp(path);
  if (buf.size() < 4 || !std::equal(buf.begin(), buf.begin() + 4, "GRDF"))
    throw IoError(IoErrc::unsupported_magic, path.string() + " is not a GRDF file");
  if (buf.size() < 16) throw IoError(IoErrc::malformed_header, "GRDF header shorter than 16 bytes");
  const std::uint32_t w = load_u32le(buf.data() + 4);
  const std::uint32_t h = load_u32le(buf.data() + 8);
  const std::uint32_t ch = load_u32le(buf.data() + 12);
  if (ch != 2)
    throw IoError(IoErrc::malformed_header, "GRDF channel count " + std::to_string(ch) + " != 2");
  if (w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20))
    throw IoError(IoErrc::malformed_header, "GRDF header: implausible dimensions");
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (buf.size() - 16 != 2 * n * 4)
    throw IoError(IoErrc::truncated_payload,
                  path.string() + ": GRDF payload is " + std::to_string(buf.size() - 16) +
                      " bytes, header implies " + std::to_string(2 * n * 4));
  GradientField g(static_cast<int>(w), static_cast<int>(h));
  const unsigned char* p = buf.data() + 16;
  for (std::size_t i = 0; i < n; ++i) g.horiz[i] = load_f32le(p + 4 * i);
  for (std::size_t i = 0; i < n; ++i) g.vert[i] = load_f32le(p + 4 * (n + i));
  return g;
}

GradientField read_gradient_field(const std::filesystem::path& path, int expected_width,
                                  int expected_height) {
  GradientField g = read_gradient_field(path);
  if (g.width != expected_width || g.height != expected_height)
    throw IoError(IoErrc::dimension_mismatch,
                  path.string() + " is " + std::to_string(g.width) + "x" +
                      std::to_string(g.height) + ", expected " + std::to_string(expected_width) +
                      "x" + std::to_string(expected_height));
  return g;
}

void write_gradient_field(const GradientField& field, const std::filesystem::path& path) {
  const std::size_t n = static_cast<std::size_t>(field.width) * field.height;
  if (field.horiz.size() != n || field.vert.size() != n)
    throw std::invalid_argument("write_gradient_field: plane length mismatch");
  std::vector<unsigned char> out{'G', 'R', 'D', 'F'};
  out.reserve(16 + 8 * n);
  store_u32le(out, static_cast<std::uint32_t>(field.width));
  store_u32le(out, static_cast<std::uint32_t>(field.height));
  store_u32le(out, 2);
  for (double v : field.horiz) store_f32le(out, static_cast<float>(v));
  for (double v : field.vert) store_f32le(out, static_cast<float>(v));
  spit(path, out);
}

Image quantize_8bit(const Image& img) {
  Image out = img;
  for (double& v : out.pixels()) v = to_byte(v);
  return out;
}

}  // namespace mfsr
