#pragma once

#include <filesystem>
#include <optional>

#include "nsurf/ingest/frame.hpp"

namespace nsurf::io {

// intrinsics.txt: one line "fx fy cx cy width height".
CameraIntrinsics read_intrinsics(const std::filesystem::path& path);
void write_intrinsics(const std::filesystem::path& path, const CameraIntrinsics& intr);

// 4x4 camera-to-world matrix, row-major, whitespace separated.
Pose read_pose(const std::filesystem::path& path);
void write_pose(const std::filesystem::path& path, const Pose& pose);

// <root>/frames/NNNNNN (without suffix).
std::filesystem::path frame_stem(const std::filesystem::path& root, std::size_t index);

// Dataset directory read lazily in index order. Depth PNGs are millimeters;
// 0 is invalid.
class Dataset : public FrameSource {
 public:
  // Throws FormatError when intrinsics are missing or frame indices are not
  // contiguous from 0.
  explicit Dataset(std::filesystem::path root);

  std::size_t size() const override { return count_; }
  Frame frame(std::size_t index) override;
  const CameraIntrinsics& intrinsics() const { return intrinsics_; }
  const std::filesystem::path& root() const { return root_; }

  // Ground-truth sidecars written by the synthetic generator, if present.
  std::optional<ImageF> ground_truth_depth(std::size_t index) const;

 private:
  std::filesystem::path root_;
  CameraIntrinsics intrinsics_;
  std::size_t count_ = 0;
};

}  // namespace nsurf::io
