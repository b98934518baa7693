#pragma once

#include <vector>

#include "nsurf/core/image.hpp"
#include "nsurf/nn/bundle.hpp"

namespace nsurf {

// Three-scale convolutional pyramid (full, 1/2, 1/4 resolution; 3x3
// kernels, ReLU) whose nearest-upsampled outputs are concatenated per pixel
// (32 + 27 + 24 = 83 channels by default), followed by a learned linear
// projection to the surfel feature width.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(nn::NetworkBundle& nets) : nets_(&nets) {}

  // Projected features at the given row-major pixel indices: |pixels| x F.
  nn::Var extract(nn::Tape& t, const ImageF& rgb, const std::vector<int>& pixels) const;
  // Unprojected pyramid features at the given pixels: |pixels| x 83.
  nn::Var pyramid(nn::Tape& t, const ImageF& rgb, const std::vector<int>& pixels) const;

  // Forward-only convenience: full-resolution projected feature map,
  // (H*W) x F.
  nn::Matrix feature_map(const ImageF& rgb) const;

 private:
  nn::NetworkBundle* nets_;
};

}  // namespace nsurf
