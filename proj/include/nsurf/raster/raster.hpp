#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nsurf/core/camera.hpp"
#include "nsurf/core/surfel_map.hpp"

namespace nsurf {

inline constexpr double kRayNear = 1e-4;  // meters
inline constexpr int kAssociationCap = 8;
inline constexpr int kRenderCap = 80;

// Intersection of a pixel ray with a surfel disk (a shading point).
struct SurfelHit {
  std::uint64_t surfel_id = 0;
  std::uint32_t surfel_index = 0;  // position in the map's storage
  double t = 0.0;                  // ray parameter, meters
  Vec3 hit_point = Vec3::Zero();
  double center_offset = 0.0;      // |hit_point - position|
};

// Strict ordering used everywhere hits are sorted: ascending t, ties by id.
inline bool hit_before(const SurfelHit& a, const SurfelHit& b) {
  return a.t < b.t || (a.t == b.t && a.surfel_id < b.surfel_id);
}

// t = (p - o).n / (d.n); a hit needs d.n != 0, t > kRayNear and
// |o + t d - p| <= r.
std::optional<SurfelHit> ray_disk_intersect(const Ray& ray, const SurfelGeometry& surfel);

// Per-pixel hit lists in CSR layout, each sorted by hit_before and truncated
// to `cap`.
class PixelSurfelBuffer {
 public:
  PixelSurfelBuffer() = default;
  PixelSurfelBuffer(int width, int height, int cap, std::vector<std::vector<SurfelHit>> per_pixel);

  int width() const { return width_; }
  int height() const { return height_; }
  int cap() const { return cap_; }
  std::size_t pixel_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::span<const SurfelHit> hits(std::size_t pixel) const {
    return {hits_.data() + offsets_[pixel], offsets_[pixel + 1] - offsets_[pixel]};
  }
  std::span<const SurfelHit> hits(int x, int y) const {
    return hits(static_cast<std::size_t>(y) * width_ + x);
  }
  std::size_t total_hits() const { return hits_.size(); }

 private:
  int width_ = 0;
  int height_ = 0;
  int cap_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<SurfelHit> hits_;
};

struct RasterOptions {
  int workers = 1;
};

// For every pixel, the `cap` nearest surfel-disk hits. Surfels are splatted
// over a conservative screen-space bound of their disk and every covered
// pixel runs the exact ray_disk_intersect test.
PixelSurfelBuffer rasterize(const SurfelMap& map, const CameraIntrinsics& intr, const Pose& pose, int cap,
                            const RasterOptions& options = {});

// Pixel-major brute force over all (pixel, surfel) pairs. Reference for
// tests.
PixelSurfelBuffer rasterize_brute_force(const SurfelMap& map, const CameraIntrinsics& intr, const Pose& pose,
                                        int cap);

struct RasterStats {
  double mean_hits = 0.0;
  std::size_t max_hits = 0;
  double coverage = 0.0;  // fraction of pixels with at least one hit
};

RasterStats raster_stats(const PixelSurfelBuffer& buffers);

}  // namespace nsurf
