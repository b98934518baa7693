#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace nsurf {

// Interleaved row-major image.
template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, int c, T fill = T{})
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {
    if (w < 0 || h < 0 || c <= 0) throw std::invalid_argument("image: invalid dimensions");
  }

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  T& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }
  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
  bool operator==(const Image& o) const = default;
};

using ImageF = Image<float>;
using ImageD = Image<double>;
using Mask = Image<std::uint8_t>;

}  // namespace nsurf
