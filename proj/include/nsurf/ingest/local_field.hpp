#pragma once

#include <vector>

#include "nsurf/core/surfel_map.hpp"
#include "nsurf/ingest/depth.hpp"
#include "nsurf/ingest/features.hpp"
#include "nsurf/ingest/normals.hpp"

namespace nsurf {

struct IngestConfig {
  int stride = 2;
  // Scale each surfel's radius by the stride so that sparser sampling still
  // covers the image without holes.
  bool radius_follows_stride = true;
  SurfelInitConfig init;
};

// Geometry of a local surfel field before features are attached.
struct LocalGeometry {
  std::vector<SurfelGeometry> surfels;  // ids 0..n-1 in row-major scan order
  std::vector<int> pixels;              // source pixel index (y*W + x) per surfel
};

// Pixels sampled at `stride` in both axes, row-major.
std::vector<int> sample_pixels(int width, int height, int stride);

// One surfel per sampled pixel with positive refined depth.
LocalGeometry build_local_geometry(const Frame& frame, const ImageF& refined_depth, const IngestConfig& config);

// Full local neural surfel field for one frame.
SurfelMap build_local_surfels(const Frame& frame, const DepthRefiner& refiner, const FeatureExtractor& extractor,
                              nn::NetworkBundle& nets, const IngestConfig& config = {});

// Assembles a map from geometry plus a |surfels| x F feature matrix.
SurfelMap assemble_map(const LocalGeometry& geometry, const nn::Matrix& features);

}  // namespace nsurf
