#pragma once

#include <vector>

#include "nsurf/core/camera.hpp"
#include "nsurf/core/image.hpp"

namespace nsurf {

// One posed RGB-D observation. Depth is camera-frame z in meters; 0 marks
// an invalid sensor reading.
struct Frame {
  ImageF rgb;           // H x W x 3, values in [0, 1]
  ImageF sensor_depth;  // H x W
  Mask valid_mask;      // H x W, 1 exactly where sensor_depth > 0
  CameraIntrinsics intrinsics;
  Pose pose;
  int index = 0;

  int width() const { return rgb.width; }
  int height() const { return rgb.height; }
  bool has_valid_depth() const;
  // Throws std::invalid_argument when shapes, ranges or the mask do not
  // match the invariants.
  void validate() const;
};

// Builds the mask from depth > 0.
Mask mask_from_depth(const ImageF& depth);

Frame make_frame(ImageF rgb, ImageF depth, const CameraIntrinsics& intr, const Pose& pose, int index);

// Random-access sequence of frames in capture order. Implementations may
// load lazily, so frames that are never requested cost nothing.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::size_t size() const = 0;
  virtual Frame frame(std::size_t index) = 0;
};

class VectorFrameSource : public FrameSource {
 public:
  explicit VectorFrameSource(std::vector<Frame> frames) : frames_(std::move(frames)) {}
  std::size_t size() const override { return frames_.size(); }
  Frame frame(std::size_t index) override { return frames_.at(index); }
  const std::vector<Frame>& frames() const { return frames_; }

 private:
  std::vector<Frame> frames_;
};

}  // namespace nsurf
