#include "nsurf/core/camera.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nsurf {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw std::invalid_argument("intrinsics: focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("intrinsics: image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    std::ostringstream msg;
    msg << "intrinsics: principal point (" << cx << ", " << cy << ") outside " << width << "x"
        << height;
    throw std::invalid_argument(msg.str());
  }
}

CameraIntrinsics CameraIntrinsics::scaled(int new_width, int new_height) const {
  const double sx = static_cast<double>(new_width) / width;
  const double sy = static_cast<double>(new_height) / height;
  return {fx * sx, fy * sy, cx * sx, cy * sy, new_width, new_height};
}

Pose Pose::from_matrix(const Mat4& m) {
  Pose p;
  p.rotation = m.topLeftCorner<3, 3>();
  p.translation = m.topRightCorner<3, 1>();
  return p;
}

Pose Pose::look_at(const Vec3& eye, const Vec3& target, const Vec3& down) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 y = down - down.dot(forward) * forward;
  if (y.norm() < 1e-12) {
    throw std::invalid_argument("look_at: down vector parallel to viewing direction");
  }
  y.normalize();
  const Vec3 x = y.cross(forward);
  Pose p;
  p.rotation.col(0) = x;
  p.rotation.col(1) = y;
  p.rotation.col(2) = forward;
  p.translation = eye;
  return p;
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Pose Pose::inverse() const {
  Pose p;
  p.rotation = rotation.transpose();
  p.translation = -(p.rotation * translation);
  return p;
}

Pose Pose::compose(const Pose& other) const {
  Pose p;
  p.rotation = rotation * other.rotation;
  p.translation = rotation * other.translation + translation;
  return p;
}

bool Pose::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) {
    return false;
  }
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

void Pose::validate(double tol) const {
  if (!is_valid(tol)) {
    throw std::invalid_argument("pose: rotation is not orthonormal with det +1");
  }
}

Ray ray_through_pixel(const CameraIntrinsics& intr, const Pose& pose, PixelCoord px) {
  if (!intr.contains(px.u, px.v)) {
    std::ostringstream msg;
    msg << "pixel (" << px.u << ", " << px.v << ") outside " << intr.width << "x" << intr.height;
    throw std::domain_error(msg.str());
  }
  const Vec3 dir_cam((px.u - intr.cx) / intr.fx, (px.v - intr.cy) / intr.fy, 1.0);
  return {pose.translation, (pose.rotation * dir_cam).normalized()};
}

Vec3 unproject(const CameraIntrinsics& intr, const Pose& pose, PixelCoord px, double depth) {
  if (!(depth > 0.0)) {
    throw std::domain_error("unproject: depth must be positive");
  }
  const Vec3 p_cam((px.u - intr.cx) / intr.fx * depth, (px.v - intr.cy) / intr.fy * depth, depth);
  return pose.to_world(p_cam);
}

std::optional<Projection> project(const CameraIntrinsics& intr, const Pose& pose, const Vec3& point) {
  const Vec3 p_cam = pose.to_camera(point);
  if (!(p_cam.z() > 0.0)) {
    return std::nullopt;
  }
  Projection out;
  out.pixel.u = intr.fx * p_cam.x() / p_cam.z() + intr.cx;
  out.pixel.v = intr.fy * p_cam.y() / p_cam.z() + intr.cy;
  out.depth = p_cam.z();
  return out;
}

}  // namespace nsurf
