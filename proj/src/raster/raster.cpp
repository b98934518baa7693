#include "nsurf/raster/raster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nsurf/core/parallel.hpp"

namespace nsurf {

std::optional<SurfelHit> ray_disk_intersect(const Ray& ray, const SurfelGeometry& s) {
  const Vec3 p = s.position.cast<double>();
  const Vec3 n = s.normal.cast<double>();
  const double denom = ray.direction.dot(n);
  if (denom == 0.0) return std::nullopt;
  const double t = (p - ray.origin).dot(n) / denom;
  if (!(t > kRayNear)) return std::nullopt;
  const Vec3 x = ray.origin + t * ray.direction;
  const double offset = (x - p).norm();
  if (!(offset <= static_cast<double>(s.radius))) return std::nullopt;
  SurfelHit hit;
  hit.surfel_id = s.id;
  hit.t = t;
  hit.hit_point = x;
  hit.center_offset = offset;
  return hit;
}

PixelSurfelBuffer::PixelSurfelBuffer(int width, int height, int cap, std::vector<std::vector<SurfelHit>> per_pixel)
    : width_(width), height_(height), cap_(cap) {
  if (per_pixel.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("pixel buffer: wrong pixel count");
  }
  offsets_.resize(per_pixel.size() + 1, 0);
  for (std::size_t p = 0; p < per_pixel.size(); ++p) {
    auto& list = per_pixel[p];
    std::sort(list.begin(), list.end(), hit_before);
    if (list.size() > static_cast<std::size_t>(cap)) list.resize(static_cast<std::size_t>(cap));
    offsets_[p + 1] = offsets_[p] + list.size();
  }
  hits_.reserve(offsets_.back());
  for (auto& list : per_pixel) hits_.insert(hits_.end(), list.begin(), list.end());
}

namespace {

std::vector<Ray> pixel_rays(const CameraIntrinsics& intr, const Pose& pose) {
  std::vector<Ray> rays(static_cast<std::size_t>(intr.width) * intr.height);
  for (int y = 0; y < intr.height; ++y) {
    for (int x = 0; x < intr.width; ++x) {
      rays[static_cast<std::size_t>(y) * intr.width + x] =
          ray_through_pixel(intr, pose, {static_cast<double>(x), static_cast<double>(y)});
    }
  }
  return rays;
}

struct PixelRect {
  int x0, y0, x1, y1;  // inclusive
  bool empty() const { return x0 > x1 || y0 > y1; }
};

// Screen-space bound of the disk: project the corners of its camera-space
// bounding box. Disks that reach z <= 0 get the whole image.
PixelRect disk_bounds(const SurfelGeometry& s, const CameraIntrinsics& intr, const Pose& pose) {
  const Vec3 c = pose.to_camera(s.position.cast<double>());
  const Vec3 n = pose.rotation.transpose() * s.normal.cast<double>();
  const double r = s.radius;
  Vec3 half;
  for (int k = 0; k < 3; ++k) half[k] = r * std::sqrt(std::max(0.0, 1.0 - n[k] * n[k])) + 1e-9 * (1.0 + r);
  const Vec3 lo = c - half, hi = c + half;
  const PixelRect none{1, 1, 0, 0};
  if (hi.z() <= 0.0) return none;
  const PixelRect full{0, 0, intr.width - 1, intr.height - 1};
  if (lo.z() <= 1e-9) return full;
  double umin = INFINITY, umax = -INFINITY, vmin = INFINITY, vmax = -INFINITY;
  for (int corner = 0; corner < 8; ++corner) {
    const double x = (corner & 1) ? hi.x() : lo.x();
    const double y = (corner & 2) ? hi.y() : lo.y();
    const double z = (corner & 4) ? hi.z() : lo.z();
    const double u = intr.fx * x / z + intr.cx;
    const double v = intr.fy * y / z + intr.cy;
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  // One pixel of padding absorbs rounding at the boundary.
  auto clampi = [](double v, int lo_, int hi_) {
    if (!(v > lo_)) return lo_;
    if (!(v < hi_)) return hi_;
    return static_cast<int>(v);
  };
  PixelRect rect;
  rect.x0 = clampi(std::floor(umin) - 1.0, 0, intr.width);
  rect.x1 = clampi(std::ceil(umax) + 1.0, -1, intr.width - 1);
  rect.y0 = clampi(std::floor(vmin) - 1.0, 0, intr.height);
  rect.y1 = clampi(std::ceil(vmax) + 1.0, -1, intr.height - 1);
  return rect;
}

}  // namespace

PixelSurfelBuffer rasterize(const SurfelMap& map, const CameraIntrinsics& intr, const Pose& pose, int cap,
                            const RasterOptions& options) {
  if (cap < 1) throw std::invalid_argument("rasterize: cap must be >= 1");
  const std::vector<Ray> rays = pixel_rays(intr, pose);
  const int workers = std::max(1, options.workers);
  std::vector<std::vector<std::vector<SurfelHit>>> partial(
      static_cast<std::size_t>(workers), std::vector<std::vector<SurfelHit>>(rays.size()));
  const std::size_t n = map.size();
  parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t w0, std::size_t w1) {
    for (std::size_t w = w0; w < w1; ++w) {
      auto& lists = partial[w];
      for (std::size_t i = n * w / workers; i < n * (w + 1) / workers; ++i) {
        const SurfelGeometry& s = map.geometry(i);
        const PixelRect rect = disk_bounds(s, intr, pose);
        if (rect.empty()) continue;
        for (int y = rect.y0; y <= rect.y1; ++y) {
          for (int x = rect.x0; x <= rect.x1; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * intr.width + x;
            if (auto hit = ray_disk_intersect(rays[p], s)) {
              hit->surfel_index = static_cast<std::uint32_t>(i);
              lists[p].push_back(*hit);
            }
          }
        }
      }
    }
  });
  std::vector<std::vector<SurfelHit>> merged = std::move(partial[0]);
  for (int w = 1; w < workers; ++w) {
    for (std::size_t p = 0; p < merged.size(); ++p) {
      auto& src = partial[static_cast<std::size_t>(w)][p];
      merged[p].insert(merged[p].end(), src.begin(), src.end());
    }
  }
  return PixelSurfelBuffer(intr.width, intr.height, cap, std::move(merged));
}

PixelSurfelBuffer rasterize_brute_force(const SurfelMap& map, const CameraIntrinsics& intr, const Pose& pose,
                                        int cap) {
  std::vector<std::vector<SurfelHit>> lists(static_cast<std::size_t>(intr.width) * intr.height);
  for (int y = 0; y < intr.height; ++y) {
    for (int x = 0; x < intr.width; ++x) {
      const Ray ray = ray_through_pixel(intr, pose, {static_cast<double>(x), static_cast<double>(y)});
      auto& list = lists[static_cast<std::size_t>(y) * intr.width + x];
      for (std::size_t i = 0; i < map.size(); ++i) {
        if (auto hit = ray_disk_intersect(ray, map.geometry(i))) {
          hit->surfel_index = static_cast<std::uint32_t>(i);
          list.push_back(*hit);
        }
      }
    }
  }
  return PixelSurfelBuffer(intr.width, intr.height, cap, std::move(lists));
}

RasterStats raster_stats(const PixelSurfelBuffer& buffers) {
  RasterStats s;
  const std::size_t pixels = buffers.pixel_count();
  if (pixels == 0) return s;
  std::size_t covered = 0;
  for (std::size_t p = 0; p < pixels; ++p) {
    const std::size_t n = buffers.hits(p).size();
    s.max_hits = std::max(s.max_hits, n);
    if (n > 0) ++covered;
  }
  s.mean_hits = static_cast<double>(buffers.total_hits()) / static_cast<double>(pixels);
  s.coverage = static_cast<double>(covered) / static_cast<double>(pixels);
  return s;
}

}  // namespace nsurf
