#include "usmask/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "usmask/error.hpp"

namespace usmask {
namespace {

std::vector<std::uint8_t> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Netpbm header token, skipping whitespace and '#' comments.
std::size_t pnm_token(const std::vector<std::uint8_t>& buf, std::size_t& pos,
                      const std::string& path) {
  for (;;) {
    while (pos < buf.size() && std::isspace(buf[pos])) ++pos;
    if (pos < buf.size() && buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::size_t value = 0;
  std::size_t start = pos;
  while (pos < buf.size() && std::isdigit(buf[pos])) {
    value = value * 10 + (buf[pos] - '0');
    ++pos;
  }
  if (pos == start) throw IoError(path, "malformed PGM header");
  return value;
}

Raster8 decode_pgm(const std::vector<std::uint8_t>& buf, const std::string& path) {
  std::size_t pos = 2;
  Raster8 r;
  r.width = pnm_token(buf, pos, path);
  r.height = pnm_token(buf, pos, path);
  const std::size_t maxval = pnm_token(buf, pos, path);
  if (maxval == 0 || maxval > 65535) throw IoError(path, "bad PGM maxval");
  ++pos;  // single whitespace before raster
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  const std::size_t n = r.width * r.height;
  if (buf.size() < pos + n * bytes_per) throw IoError(path, "truncated PGM raster");
  r.channels = 1;
  r.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t v = bytes_per == 1 ? buf[pos + i]
                                   : (std::size_t(buf[pos + 2 * i]) << 8) | buf[pos + 2 * i + 1];
    r.data[i] = maxval == 255
                    ? static_cast<std::uint8_t>(v)
                    : static_cast<std::uint8_t>(std::lround(255.0 * double(v) / double(maxval)));
  }
  return r;
}

struct PngSource {
  const std::vector<std::uint8_t>* buf;
  std::size_t pos;
  char error[256];
};

void png_read_mem(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
  if (src->pos + n > src->buf->size()) png_error(png, "truncated PNG data");
  std::memcpy(out, src->buf->data() + src->pos, n);
  src->pos += n;
}

void png_on_error(png_structp png, png_const_charp msg) {
  auto* src = static_cast<PngSource*>(png_get_error_ptr(png));
  std::snprintf(src->error, sizeof src->error, "%s", msg);
  png_longjmp(png, 1);
}

void png_on_warning(png_structp, png_const_charp) {}

// Classic libpng path rather than the simplified API: the simplified reader
// treats 16-bit samples as linear light and gamma-encodes them on the way to
// 8 bits, and composites alpha. Here 16-bit samples are scaled linearly and
// alpha is dropped.
Raster8 decode_png(const std::vector<std::uint8_t>& buf, const std::string& path) {
  PngSource src{&buf, 8, {0}};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &src, png_on_error, png_on_warning);
  if (!png) throw IoError(path, "PNG decode failed: out of memory");
  png_infop info = png_create_info_struct(png);
  Raster8 r;
  std::vector<png_bytep> rows;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    throw IoError(path, std::string("PNG decode failed: ") + (src.error[0] ? src.error : "error"));
  }
  png_set_read_fn(png, &src, png_read_mem);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_scale_16(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  r.height = png_get_image_height(png, info);
  r.width = png_get_image_width(png, info);
  r.channels = png_get_channels(png, info);
  if ((r.channels != 1 && r.channels != 3) || png_get_bit_depth(png, info) != 8)
    png_error(png, "unexpected sample layout");
  r.data.resize(r.height * r.width * r.channels);
  rows.resize(r.height);
  for (std::size_t y = 0; y < r.height; ++y) rows[y] = r.data.data() + y * r.width * r.channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return r;
}

}  // namespace

Raster8 read_raster(const std::string& path) {
  const auto buf = slurp(path);
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (buf.size() >= 8 && std::memcmp(buf.data(), kPngSig, 8) == 0) return decode_png(buf, path);
  if (buf.size() >= 2 && buf[0] == 'P' && buf[1] == '5') return decode_pgm(buf, path);
  throw IoError(path, "unsupported image format (expected PNG or binary PGM)");
}

void write_pgm(const std::string& path, std::size_t height, std::size_t width,
               const std::vector<std::uint8_t>& gray) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(gray.data()), std::streamsize(gray.size()));
  if (!out) throw IoError(path, "write failed");
}

void write_png_gray(const std::string& path, std::size_t height, std::size_t width,
                    const std::vector<std::uint8_t>& gray) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, gray.data(), 0, nullptr))
    throw IoError(path, std::string("PNG write failed: ") + image.message);
}

std::vector<std::uint8_t> to_gray8(const Image& img) {
  std::vector<std::uint8_t> out(img.size());
  auto px = img.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = std::clamp(px[i], 0.0, 1.0);
    out[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return out;
}

}  // namespace usmask
