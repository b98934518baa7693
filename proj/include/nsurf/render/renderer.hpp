#pragma once

#include <vector>

#include "nsurf/core/image.hpp"
#include "nsurf/core/surfel_map.hpp"
#include "nsurf/nn/bundle.hpp"
#include "nsurf/raster/raster.hpp"
#include "nsurf/render/composite.hpp"
#include "nsurf/render/shading.hpp"

namespace nsurf {

// Rasterization-guided rendering: rasterize with cap M, shade every hit and
// composite per pixel. Pixels without hits get the background. Output does
// not depend on config.workers.
ImageF render_image(const SurfelMap& map, const CameraIntrinsics& intr, const Pose& pose,
                    const nn::NetworkBundle& nets, const RenderConfig& config, RasterStats* stats = nullptr);

// Hits of a set of pixels laid out for the differentiable renderer.
struct RayBatch {
  explicit RayBatch(const PositionalEmbedding& emb) : hits(emb) {}

  std::vector<int> pixels;
  HitInputs hits;
  std::vector<int> offsets;  // hits of pixel k are [offsets[k], offsets[k+1])
  nn::Vector deltas;
};

// Feature rows refer to storage indices of `map`.
RayBatch prepare_rays(const SurfelMap& map, const PixelSurfelBuffer& buffers, const CameraIntrinsics& intr,
                      const Pose& pose, const std::vector<int>& pixels, const RenderConfig& config,
                      const PositionalEmbedding& emb);

// |pixels| x 3 colors, differentiable in the surfel features (N x F) and
// the shading networks.
nn::Var render_rays(nn::Tape& t, nn::NetworkBundle& nets, nn::Var surfel_features, const RayBatch& batch,
                    const RenderConfig& config);

// Dense ray-marching reference: samples every `step` meters up to t_far;
// a sample takes density and color from every surfel whose disk slab
// (|plane distance| <= step / 2, in-plane distance <= radius) contains it,
// found by scanning all surfels. Density is summed, color is
// density-weighted, and each sample spans `step`.
ImageF render_image_dense_baseline(const SurfelMap& map, const CameraIntrinsics& intr, const Pose& pose,
                                   const nn::NetworkBundle& nets, const RenderConfig& config, double step,
                                   double t_far);

}  // namespace nsurf
