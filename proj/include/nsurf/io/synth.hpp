#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nsurf/core/camera.hpp"
#include "nsurf/core/image.hpp"
#include "nsurf/core/surfel_map.hpp"
#include "nsurf/ingest/frame.hpp"
#include "nsurf/io/config.hpp"

namespace nsurf::synth {

enum class Pattern { solid, checker, gradient };

struct Material {
  Pattern pattern = Pattern::solid;
  Vec3 color_a{0.7, 0.7, 0.7};
  Vec3 color_b{0.3, 0.3, 0.3};
  double scale = 0.25;  // meters per checker cell / stripe period
};

// Parallelogram origin + s*edge_u + t*edge_v, s, t in [0, 1]. The visible
// side is the one `normal` points to; hits from behind are ignored.
struct Panel {
  Vec3 origin = Vec3::Zero();
  Vec3 edge_u = Vec3::UnitX();
  Vec3 edge_v = Vec3::UnitY();
  Vec3 normal = Vec3::UnitZ();
  Material material;
};

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();
  Material material;
};

enum class TrajectoryKind { orbit, sweep, fixed };

struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::orbit;
  // orbit: eye on a horizontal circle of `radius` around `center`, looking
  // outward and pitched down by `pitch_deg`; the heading covers `arc_deg`
  // starting at `start_deg`.
  Vec3 center{0.0, 0.0, 1.3};
  double radius = 0.5;
  double start_deg = 0.0;
  double arc_deg = 360.0;
  double pitch_deg = 15.0;
  // sweep: eye moves linearly from sweep_start to sweep_end looking along
  // look_dir; fixed: eye at sweep_start looking along look_dir.
  Vec3 sweep_start{0.0, 0.0, 0.0};
  Vec3 sweep_end{0.0, 0.0, 0.0};
  Vec3 look_dir{0.0, 0.0, 1.0};
  Vec3 down{0.0, 0.0, -1.0};
};

struct Scene {
  bool has_room = true;
  Vec3 room_min{-2.0, -2.0, 0.0};
  Vec3 room_max{2.0, 2.0, 2.5};
  // -x, +x, -y, +y, floor, ceiling
  Material walls[6];
  std::vector<Box> boxes;
  std::vector<Panel> panels;
  Vec3 light_dir{0.3, 0.5, 0.8};  // toward the light
  double ambient = 0.35;
  CameraIntrinsics intrinsics;
  Trajectory trajectory;
  double hole_probability = 0.0;
  int hole_blobs = 0;
  double blob_radius = 4.0;  // pixels

  // Every visible rectangle: room walls (inward), box faces (outward) and
  // free panels.
  std::vector<Panel> all_panels() const;
  double extent() const;  // room diagonal, or a bound on the panels
};

struct SurfaceHit {
  double t = 0.0;
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::Zero();  // unit, facing the ray origin
  Vec3 albedo = Vec3::Zero();
};

// Closed-form nearest hit over all panels.
std::optional<SurfaceHit> trace(const std::vector<Panel>& panels, const Ray& ray);
Vec3 albedo(const Material& m, double s, double t);
// Lambertian: albedo * (ambient + (1 - ambient) max(0, n . l)).
Vec3 shade(const Scene& scene, const SurfaceHit& hit);

Pose trajectory_pose(const Trajectory& traj, std::size_t index, std::size_t count);

struct View {
  ImageF rgb;      // 3 channels
  ImageF depth;    // camera z, 0 where the ray escapes
  ImageF normals;  // 3 channels, world frame, 0 where the ray escapes
};

View render_view(const Scene& scene, const Pose& pose);

// Zeroes depth pixels with probability p and inside `blobs` random discs.
void apply_holes(ImageF& depth, double probability, int blobs, double blob_radius, std::uint64_t seed);

// Frames of the trajectory with hole noise applied to the sensor depth.
// `ground_truth`, if given, receives the noiseless views.
std::vector<Frame> generate_frames(const Scene& scene, std::size_t count, std::uint64_t seed,
                                   std::vector<View>* ground_truth = nullptr);

// Writes the dataset layout plus NNNNNN.gt_depth.f32 / .gt_normal.f32
// sidecars.
void synth_generate(const Scene& scene, std::size_t count, std::uint64_t seed, const std::filesystem::path& out);

// Area-uniform surfels on the scene surfaces with zero features.
SurfelMap sample_surfels(const Scene& scene, std::size_t count, std::uint64_t seed,
                         std::size_t feature_dim = kDefaultFeatureDim);

// Presets: "room" (reference), "room-b" (different textures and layout),
// "wall" (one fronto-parallel textured wall at 2 m, camera at the origin
// looking down +z).
Scene preset(const std::string& name, int width, int height);
// preset + overrides from keys under "scene." and "camera.".
Scene scene_from_config(const io::Config& config);

}  // namespace nsurf::synth
