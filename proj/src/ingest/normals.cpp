#include "nsurf/ingest/normals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nsurf {

std::vector<Vec3> estimate_normals(const ImageF& depth, const CameraIntrinsics& intr, const Pose& pose) {
  const int w = depth.width, h = depth.height;
  std::vector<Vec3> points(static_cast<std::size_t>(w) * h);
  std::vector<char> ok(points.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = depth.at(x, y);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (d > 0.0) {
        points[i] = unproject(intr, pose, {static_cast<double>(x), static_cast<double>(y)}, d);
        ok[i] = 1;
      }
    }
  }
  auto at = [&](int x, int y) -> std::size_t { return static_cast<std::size_t>(y) * w + x; };

  std::vector<Vec3> normals(points.size());
  const Vec3 center = pose.center();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = at(x, y);
      const Vec3 dir_cam((x - intr.cx) / intr.fx, (y - intr.cy) / intr.fy, 1.0);
      const Vec3 view = (pose.rotation * dir_cam).normalized();
      Vec3 n = -view;
      if (ok[i]) {
        const int x0 = std::max(x - 1, 0), x1 = std::min(x + 1, w - 1);
        const int y0 = std::max(y - 1, 0), y1 = std::min(y + 1, h - 1);
        if (x0 != x1 && y0 != y1 && ok[at(x0, y)] && ok[at(x1, y)] && ok[at(x, y0)] && ok[at(x, y1)]) {
          const Vec3 du = points[at(x1, y)] - points[at(x0, y)];
          const Vec3 dv = points[at(x, y1)] - points[at(x, y0)];
          const Vec3 c = du.cross(dv);
          const double len = c.norm();
          if (len > 1e-12 * std::max(1.0, du.norm() * dv.norm()) && std::isfinite(len)) {
            n = c / len;
            if (n.dot(center - points[i]) < 0.0) n = -n;
            // A surface seen exactly edge-on has no usable orientation.
            if (std::abs(n.dot(view)) < 1e-9) n = -view;
          }
        }
      }
      normals[i] = n;
    }
  }
  return normals;
}

RadiusWeight init_radius_weight(double depth, const Vec3& normal_cam, PixelCoord px, const CameraIntrinsics& intr,
                                double footprint, const SurfelInitConfig& config) {
  if (!(depth > 0.0)) throw std::domain_error("init_radius_weight: depth must be positive");
  const Vec3 view = Vec3((px.u - intr.cx) / intr.fx, (px.v - intr.cy) / intr.fy, 1.0).normalized();
  const double cosine = std::max(std::abs(normal_cam.dot(view)), config.min_cos);
  RadiusWeight out;
  out.radius = footprint * (config.radius_scale * depth / intr.focal_mean()) / cosine;

  const double corners[4][2] = {{0.0, 0.0},
                                {intr.width - 1.0, 0.0},
                                {0.0, intr.height - 1.0},
                                {intr.width - 1.0, intr.height - 1.0}};
  double max_dist = 0.0;
  for (const auto& c : corners) max_dist = std::max(max_dist, std::hypot(c[0] - intr.cx, c[1] - intr.cy));
  const double gamma = max_dist > 0.0 ? std::hypot(px.u - intr.cx, px.v - intr.cy) / max_dist : 0.0;
  out.weight = std::exp(-gamma * gamma / (2.0 * config.weight_sigma * config.weight_sigma));
  return out;
}

}  // namespace nsurf
