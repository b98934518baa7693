#pragma once

#include <vector>

#include "nsurf/core/camera.hpp"
#include "nsurf/core/image.hpp"

namespace nsurf {

// Per-pixel unit normals in the world frame from central differences of the
// unprojected depth (one-sided at the border), oriented toward the camera.
// Pixels whose depth is <= 0 or whose tangent vectors are degenerate get the
// negated viewing direction. Row-major, width*height entries.
std::vector<Vec3> estimate_normals(const ImageF& depth, const CameraIntrinsics& intr, const Pose& pose);

// Initialisation constants for new surfels.
struct SurfelInitConfig {
  double radius_scale = 1.4142135623730951;  // sqrt(2)
  double min_cos = 0.25881904510252074;      // cos(75 deg)
  double weight_sigma = 0.6;
};

struct RadiusWeight {
  double radius = 0.0;
  double weight = 0.0;
};

// radius = footprint * (radius_scale * depth / f_mean) / max(|n.v|, min_cos)
// weight = exp(-g^2 / (2 sigma^2)), g = |px - c| / (largest corner distance).
// `normal_cam` and the viewing ray are both in the camera frame; footprint
// is the pixel stride the surfel stands for (1 for every-pixel sampling).
RadiusWeight init_radius_weight(double depth, const Vec3& normal_cam, PixelCoord px, const CameraIntrinsics& intr,
                                double footprint = 1.0, const SurfelInitConfig& config = {});

}  // namespace nsurf
