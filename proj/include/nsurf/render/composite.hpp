#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "nsurf/core/camera.hpp"
#include "nsurf/raster/raster.hpp"

namespace nsurf {

struct RenderConfig {
  int max_hits = kRenderCap;  // M
  double last_delta = 0.01;   // meters, interval assigned to the last hit
  Eigen::Vector3d background = Eigen::Vector3d::Zero();
  int workers = 1;
  // Forward shading precision for render_image; training always uses
  // double.
  bool double_precision = false;

  void validate() const;
};

struct CompositeResult {
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  std::vector<double> transmittance;  // tau_i before hit i
  std::vector<double> weights;        // tau_i (1 - exp(-sigma_i delta_i))
  double final_transmittance = 1.0;
};

// Interval lengths t_{i+1} - t_i, with config.last_delta for the last hit.
std::vector<double> interval_lengths(std::span<const double> t, double last_delta);

// Front-to-back alpha compositing. Throws std::invalid_argument when t is
// not nondecreasing, when there are more than max_hits samples, or when the
// arrays disagree in length.
CompositeResult composite(std::span<const double> t, std::span<const double> sigma,
                          std::span<const Eigen::Vector3d> rgb, const RenderConfig& config);
CompositeResult composite(std::span<const SurfelHit> hits, std::span<const double> sigma,
                          std::span<const Eigen::Vector3d> rgb, const RenderConfig& config);

}  // namespace nsurf
