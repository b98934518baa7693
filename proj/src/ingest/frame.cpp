#include "nsurf/ingest/frame.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nsurf {

Mask mask_from_depth(const ImageF& depth) {
  Mask m(depth.width, depth.height, 1, 0);
  for (std::size_t i = 0; i < depth.data.size(); ++i) m.data[i] = depth.data[i] > 0.0f ? 1 : 0;
  return m;
}

bool Frame::has_valid_depth() const {
  return std::any_of(valid_mask.data.begin(), valid_mask.data.end(), [](std::uint8_t m) { return m != 0; });
}

void Frame::validate() const {
  if (rgb.channels != 3 || sensor_depth.channels != 1 || valid_mask.channels != 1) {
    throw std::invalid_argument("frame: wrong channel counts");
  }
  if (rgb.width != sensor_depth.width || rgb.height != sensor_depth.height ||
      rgb.width != valid_mask.width || rgb.height != valid_mask.height) {
    throw std::invalid_argument("frame: image sizes differ");
  }
  if (rgb.width != intrinsics.width || rgb.height != intrinsics.height) {
    throw std::invalid_argument("frame: image size does not match intrinsics");
  }
  intrinsics.validate();
  pose.validate();
  for (float c : rgb.data) {
    if (!(c >= 0.0f && c <= 1.0f)) throw std::invalid_argument("frame: rgb value outside [0,1]");
  }
  for (std::size_t i = 0; i < sensor_depth.data.size(); ++i) {
    const float d = sensor_depth.data[i];
    if (!std::isfinite(d) || d < 0.0f) throw std::invalid_argument("frame: invalid depth value");
    if ((d > 0.0f) != (valid_mask.data[i] != 0)) {
      throw std::invalid_argument("frame: valid mask does not match depth");
    }
  }
}

Frame make_frame(ImageF rgb, ImageF depth, const CameraIntrinsics& intr, const Pose& pose, int index) {
  Frame f;
  f.valid_mask = mask_from_depth(depth);
  f.rgb = std::move(rgb);
  f.sensor_depth = std::move(depth);
  f.intrinsics = intr;
  f.pose = pose;
  f.index = index;
  f.validate();
  return f;
}

}  // namespace nsurf
