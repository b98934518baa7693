#include "nsurf/io/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "nsurf/core/binary_io.hpp"
#include "nsurf/io/image_io.hpp"

namespace nsurf::io {

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw FormatError(path.string() + ": write failed");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

CameraIntrinsics read_intrinsics(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  CameraIntrinsics intr;
  if (!(in >> intr.fx >> intr.fy >> intr.cx >> intr.cy >> intr.width >> intr.height)) {
    throw FormatError(path.string() + ": expected 'fx fy cx cy width height'");
  }
  try {
    intr.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return intr;
}

void write_intrinsics(const std::filesystem::path& path, const CameraIntrinsics& intr) {
  write_text(path, format_double(intr.fx) + " " + format_double(intr.fy) + " " + format_double(intr.cx) + " " +
                       format_double(intr.cy) + " " + std::to_string(intr.width) + " " +
                       std::to_string(intr.height) + "\n");
}

Pose read_pose(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (!(in >> m(r, c))) throw FormatError(path.string() + ": expected 16 numbers");
    }
  }
  Pose pose = Pose::from_matrix(m);
  pose.validate();  // std::invalid_argument names the violated invariant
  return pose;
}

void write_pose(const std::filesystem::path& path, const Pose& pose) {
  const Mat4 m = pose.matrix();
  std::string text;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) text += format_double(m(r, c)) + (c == 3 ? "\n" : " ");
  }
  write_text(path, text);
}

std::filesystem::path frame_stem(const std::filesystem::path& root, std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06zu", index);
  return root / "frames" / name;
}

Dataset::Dataset(std::filesystem::path root) : root_(std::move(root)) {
  intrinsics_ = read_intrinsics(root_ / "intrinsics.txt");
  const std::filesystem::path frames = root_ / "frames";
  if (!std::filesystem::is_directory(frames)) throw FormatError(frames.string() + ": missing frames directory");
  std::set<std::size_t> indices;
  const std::string suffix = ".color.png";
  for (const auto& entry : std::filesystem::directory_iterator(frames)) {
    const std::string name = entry.path().filename().string();
    if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    const std::string stem = name.substr(0, name.size() - suffix.size());
    std::size_t value = 0;
    try {
      std::size_t used = 0;
      value = std::stoul(stem, &used);
      if (used != stem.size()) throw std::invalid_argument(stem);
    } catch (const std::exception&) {
      throw FormatError(entry.path().string() + ": frame name is not an index");
    }
    indices.insert(value);
  }
  count_ = indices.size();
  if (!indices.empty() && *indices.rbegin() != count_ - 1) {
    throw FormatError(frames.string() + ": frame indices are not contiguous from 0");
  }
}

Frame Dataset::frame(std::size_t index) {
  if (index >= count_) throw std::out_of_range("dataset: frame index out of range");
  const std::string stem = frame_stem(root_, index).string();
  ImageF rgb = read_png_rgb(stem + ".color.png");
  ImageF depth = read_depth_png(stem + ".depth.png");
  const Pose pose = read_pose(stem + ".pose.txt");
  if (rgb.width != intrinsics_.width || rgb.height != intrinsics_.height || !rgb.same_shape(ImageF(depth.width, depth.height, 3))) {
    throw FormatError(stem + ": image size does not match intrinsics");
  }
  return make_frame(std::move(rgb), std::move(depth), intrinsics_, pose, static_cast<int>(index));
}

std::optional<ImageF> Dataset::ground_truth_depth(std::size_t index) const {
  const std::filesystem::path p = frame_stem(root_, index).string() + ".gt_depth.f32";
  if (!std::filesystem::exists(p)) return std::nullopt;
  return read_float_image(p);
}

}  // namespace nsurf::io
