#include "nsurf/io/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

#include "nsurf/core/binary_io.hpp"

namespace nsurf::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw FormatError(path.string() + ": " + what);
}

void write_png(const std::filesystem::path& path, int width, int height, int color_type, int bit_depth,
               const std::vector<std::uint8_t>& bytes) {
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) fail(path, "cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(path, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(path, "PNG encoding failed");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t stride = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(y) * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Decodes to 8-bit RGB (want_rgb) or 16-bit gray.
std::vector<std::uint8_t> read_png(const std::filesystem::path& path, bool want_rgb, int& width, int& height) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) fail(path, "cannot open");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) fail(path, "not a PNG file");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "libpng initialisation failed");
  }
  std::vector<std::uint8_t> bytes;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "corrupt PNG data");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (want_rgb) {
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    if (depth < 8 && color == PNG_COLOR_TYPE_GRAY) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  } else {
    if (color != PNG_COLOR_TYPE_GRAY || depth != 16) {
      png_destroy_read_struct(&png, &info, nullptr);
      fail(path, "expected a 16-bit grayscale PNG");
    }
    png_set_swap(png);  // host little-endian
  }
  png_read_update_info(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  bytes.resize(stride * static_cast<std::size_t>(height));
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) rows[static_cast<std::size_t>(y)] = bytes.data() + stride * static_cast<std::size_t>(y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return bytes;
}

}  // namespace

void write_png_rgb(const std::filesystem::path& path, const ImageF& rgb) {
  if (rgb.channels != 3) throw std::invalid_argument("write_png_rgb: expected 3 channels");
  std::vector<std::uint8_t> bytes(rgb.data.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const double v = std::isfinite(rgb.data[i]) ? std::clamp<double>(rgb.data[i], 0.0, 1.0) : 0.0;
    bytes[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  write_png(path, rgb.width, rgb.height, PNG_COLOR_TYPE_RGB, 8, bytes);
}

ImageF read_png_rgb(const std::filesystem::path& path) {
  int w = 0, h = 0;
  const std::vector<std::uint8_t> bytes = read_png(path, true, w, h);
  ImageF out(w, h, 3);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = static_cast<float>(bytes[i] / 255.0);
  return out;
}

void write_png_gray16(const std::filesystem::path& path, const Image<std::uint16_t>& image) {
  if (image.channels != 1) throw std::invalid_argument("write_png_gray16: expected 1 channel");
  std::vector<std::uint8_t> bytes(image.data.size() * 2);
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    bytes[2 * i] = static_cast<std::uint8_t>(image.data[i] >> 8);  // PNG is big-endian
    bytes[2 * i + 1] = static_cast<std::uint8_t>(image.data[i] & 0xff);
  }
  write_png(path, image.width, image.height, PNG_COLOR_TYPE_GRAY, 16, bytes);
}

Image<std::uint16_t> read_png_gray16(const std::filesystem::path& path) {
  int w = 0, h = 0;
  const std::vector<std::uint8_t> bytes = read_png(path, false, w, h);
  Image<std::uint16_t> out(w, h, 1);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
  }
  return out;
}

void write_depth_png(const std::filesystem::path& path, const ImageF& depth_m) {
  Image<std::uint16_t> mm(depth_m.width, depth_m.height, 1);
  for (std::size_t i = 0; i < mm.data.size(); ++i) {
    const double v = std::round(static_cast<double>(depth_m.data[i]) * 1000.0);
    mm.data[i] = (v > 0.0 && v <= 65535.0) ? static_cast<std::uint16_t>(v) : 0;
  }
  write_png_gray16(path, mm);
}

ImageF read_depth_png(const std::filesystem::path& path) {
  const Image<std::uint16_t> mm = read_png_gray16(path);
  ImageF out(mm.width, mm.height, 1);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = static_cast<float>(mm.data[i] / 1000.0);
  return out;
}

void write_float_image(const std::filesystem::path& path, const ImageF& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(image.width));
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(image.height));
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(image.channels));
  for (float v : image.data) binary::write_le<float>(out, v);
  if (!out) fail(path, "write failed");
}

ImageF read_float_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  try {
    const auto w = binary::read_le<std::uint32_t>(in);
    const auto h = binary::read_le<std::uint32_t>(in);
    const auto c = binary::read_le<std::uint32_t>(in);
    if (w > 65536 || h > 65536 || c < 1 || c > 16) fail(path, "implausible image header");
    ImageF out(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
    for (float& v : out.data) v = binary::read_le<float>(in);
    return out;
  } catch (const FormatError& e) {
    fail(path, e.what());
  }
}

}  // namespace nsurf::io
