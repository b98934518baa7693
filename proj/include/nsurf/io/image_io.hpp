#pragma once

#include <cstdint>
#include <filesystem>

#include "nsurf/core/image.hpp"

namespace nsurf::io {

// 8-bit RGB PNG <-> 3-channel float image in [0, 1]. Writing clamps and
// rounds to the nearest 8-bit level.
void write_png_rgb(const std::filesystem::path& path, const ImageF& rgb);
ImageF read_png_rgb(const std::filesystem::path& path);

// 16-bit grayscale PNG.
void write_png_gray16(const std::filesystem::path& path, const Image<std::uint16_t>& image);
Image<std::uint16_t> read_png_gray16(const std::filesystem::path& path);

// Depth in meters <-> 16-bit millimeters (0 = invalid). Depths beyond
// 65.535 m are written as invalid.
void write_depth_png(const std::filesystem::path& path, const ImageF& depth_m);
ImageF read_depth_png(const std::filesystem::path& path);

// Raw little-endian float32 planes with a small header, used for
// ground-truth sidecars.
void write_float_image(const std::filesystem::path& path, const ImageF& image);
ImageF read_float_image(const std::filesystem::path& path);

}  // namespace nsurf::io
