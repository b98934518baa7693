#pragma once

#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace nsurf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

// Pinhole intrinsics. Pixel (u, v) maps to the continuous image coordinate
// (u, v); there is no half-pixel offset.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  double focal_mean() const { return 0.5 * (fx + fy); }
  bool contains(double u, double v) const {
    return u >= 0.0 && v >= 0.0 && u < width && v < height;
  }
  // Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
  // Same camera resampled to a new resolution (focal and principal point
  // scaled by the size ratio).
  CameraIntrinsics scaled(int new_width, int new_height) const;
};

// Rigid camera-to-world transform.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
  static Pose from_matrix(const Mat4& m);
  // Camera looking from `eye` towards `target`; camera y points along
  // the projection of `down` orthogonal to the viewing axis.
  static Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& down);

  Mat4 matrix() const;
  Pose inverse() const;
  // (*this) * other: apply `other` first.
  Pose compose(const Pose& other) const;

  Vec3 center() const { return translation; }
  Vec3 to_world(const Vec3& p_cam) const { return rotation * p_cam + translation; }
  Vec3 to_camera(const Vec3& p_world) const {
    return rotation.transpose() * (p_world - translation);
  }

  // Orthonormality and det = +1 within `tol`; throws std::invalid_argument.
  void validate(double tol = 1e-6) const;
  bool is_valid(double tol = 1e-6) const;
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();

  Vec3 at(double t) const { return origin + t * direction; }
};

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

struct Projection {
  PixelCoord pixel;
  double depth = 0.0;  // camera-frame z
};

// Ray from the camera center through pixel `px`. Throws std::domain_error
// when `px` is outside the image.
Ray ray_through_pixel(const CameraIntrinsics& intr, const Pose& pose, PixelCoord px);

// World point at camera-frame depth `depth` (z, not ray length) through `px`.
// Throws std::domain_error when depth <= 0.
Vec3 unproject(const CameraIntrinsics& intr, const Pose& pose, PixelCoord px, double depth);

// Perspective projection; std::nullopt means the point is behind the camera
// (camera z <= 0). The pixel may fall outside the image.
std::optional<Projection> project(const CameraIntrinsics& intr, const Pose& pose, const Vec3& point);

}  // namespace nsurf
