#include "nsurf/io/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include "nsurf/core/binary_io.hpp"
#include "nsurf/io/dataset.hpp"
#include "nsurf/io/image_io.hpp"

namespace nsurf::synth {

namespace {

constexpr double kTraceNear = 1e-6;

Panel make_panel(const Vec3& origin, const Vec3& u, const Vec3& v, const Vec3& facing, const Material& m) {
  Panel p{origin, u, v, u.cross(v).normalized(), m};
  if (p.normal.dot(facing) < 0.0) p.normal = -p.normal;
  return p;
}

// The six faces of an axis-aligned box; normals point outward (or inward
// for the room).
void add_box_faces(std::vector<Panel>& out, const Vec3& lo, const Vec3& hi, bool inward, const Material* per_face) {
  const Vec3 size = hi - lo;
  for (int axis = 0; axis < 3; ++axis) {
    const int a = (axis + 1) % 3, b = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      Vec3 origin = lo;
      origin[axis] = side ? hi[axis] : lo[axis];
      Vec3 u = Vec3::Zero(), v = Vec3::Zero();
      u[a] = size[a];
      v[b] = size[b];
      Vec3 facing = Vec3::Zero();
      facing[axis] = (side ? 1.0 : -1.0) * (inward ? -1.0 : 1.0);
      // Face order: -x, +x, -y, +y, -z, +z.
      out.push_back(make_panel(origin, u, v, facing, per_face[axis * 2 + side]));
    }
  }
}

Material checker(Vec3 a, Vec3 b, double scale) { return {Pattern::checker, a, b, scale}; }
Material gradient(Vec3 a, Vec3 b, double scale) { return {Pattern::gradient, a, b, scale}; }

CameraIntrinsics default_intrinsics(int width, int height) {
  CameraIntrinsics intr;
  intr.width = width;
  intr.height = height;
  intr.fx = intr.fy = 0.75 * width;
  intr.cx = 0.5 * (width - 1);
  intr.cy = 0.5 * (height - 1);
  return intr;
}

}  // namespace

std::vector<Panel> Scene::all_panels() const {
  std::vector<Panel> out;
  if (has_room) add_box_faces(out, room_min, room_max, true, walls);
  for (const Box& b : boxes) {
    const Material faces[6] = {b.material, b.material, b.material, b.material, b.material, b.material};
    add_box_faces(out, b.min, b.max, false, faces);
  }
  out.insert(out.end(), panels.begin(), panels.end());
  return out;
}

double Scene::extent() const {
  if (has_room) return (room_max - room_min).norm();
  double r = 1.0;
  for (const Panel& p : all_panels()) {
    const Vec3 corners[4] = {p.origin, p.origin + p.edge_u, p.origin + p.edge_v, p.origin + p.edge_u + p.edge_v};
    for (const Vec3& c : corners) {
      r = std::max(r, 2.0 * c.norm());
    }
  }
  return r;
}

Vec3 albedo(const Material& m, double s, double t) {
  switch (m.pattern) {
    case Pattern::solid:
      return m.color_a;
    case Pattern::checker: {
      const long cell = static_cast<long>(std::floor(s / m.scale)) + static_cast<long>(std::floor(t / m.scale));
      return (cell & 1) ? m.color_b : m.color_a;
    }
    case Pattern::gradient: {
      const double k = 2.0 * std::numbers::pi / m.scale;
      const double mix = 0.5 + 0.5 * std::sin(k * s) * std::cos(0.7 * k * t);
      return (1.0 - mix) * m.color_a + mix * m.color_b;
    }
  }
  return m.color_a;
}

std::optional<SurfaceHit> trace(const std::vector<Panel>& panels, const Ray& ray) {
  std::optional<SurfaceHit> best;
  for (const Panel& p : panels) {
    const double denom = ray.direction.dot(p.normal);
    if (!(denom < 0.0)) continue;  // parallel or seen from behind
    const double t = (p.origin - ray.origin).dot(p.normal) / denom;
    if (!(t > kTraceNear) || (best && t >= best->t)) continue;
    const Vec3 x = ray.origin + t * ray.direction;
    const Vec3 rel = x - p.origin;
    // Solve rel = s u + t v in the panel plane.
    const double uu = p.edge_u.dot(p.edge_u), uv = p.edge_u.dot(p.edge_v), vv = p.edge_v.dot(p.edge_v);
    const double ru = rel.dot(p.edge_u), rv = rel.dot(p.edge_v);
    const double det = uu * vv - uv * uv;
    const double s = (ru * vv - rv * uv) / det;
    const double q = (rv * uu - ru * uv) / det;
    if (s < 0.0 || s > 1.0 || q < 0.0 || q > 1.0) continue;
    SurfaceHit h;
    h.t = t;
    h.point = x;
    h.normal = p.normal;
    h.albedo = albedo(p.material, s * std::sqrt(uu), q * std::sqrt(vv));
    best = h;
  }
  return best;
}

Vec3 shade(const Scene& scene, const SurfaceHit& hit) {
  const double lambert = std::max(0.0, hit.normal.dot(scene.light_dir.normalized()));
  return (hit.albedo * (scene.ambient + (1.0 - scene.ambient) * lambert)).cwiseMin(1.0).cwiseMax(0.0);
}

Pose trajectory_pose(const Trajectory& traj, std::size_t index, std::size_t count) {
  const double f = count > 1 ? static_cast<double>(index) / static_cast<double>(count) : 0.0;
  switch (traj.kind) {
    case TrajectoryKind::orbit: {
      const double heading = (traj.start_deg + f * traj.arc_deg) * std::numbers::pi / 180.0;
      const double pitch = traj.pitch_deg * std::numbers::pi / 180.0;
      const Vec3 out(std::cos(heading), std::sin(heading), 0.0);
      const Vec3 eye = traj.center + traj.radius * out;
      const Vec3 dir = std::cos(pitch) * out - std::sin(pitch) * Vec3::UnitZ();
      return Pose::look_at(eye, eye + dir, traj.down);
    }
    case TrajectoryKind::sweep: {
      const double g = count > 1 ? static_cast<double>(index) / static_cast<double>(count - 1) : 0.0;
      const Vec3 eye = (1.0 - g) * traj.sweep_start + g * traj.sweep_end;
      return Pose::look_at(eye, eye + traj.look_dir, traj.down);
    }
    case TrajectoryKind::fixed:
      return Pose::look_at(traj.sweep_start, traj.sweep_start + traj.look_dir, traj.down);
  }
  return Pose::identity();
}

View render_view(const Scene& scene, const Pose& pose) {
  const CameraIntrinsics& intr = scene.intrinsics;
  const std::vector<Panel> panels = scene.all_panels();
  View v{ImageF(intr.width, intr.height, 3), ImageF(intr.width, intr.height, 1), ImageF(intr.width, intr.height, 3)};
  const Vec3 forward = pose.rotation.col(2);
  for (int y = 0; y < intr.height; ++y) {
    for (int x = 0; x < intr.width; ++x) {
      const Ray ray = ray_through_pixel(intr, pose, {static_cast<double>(x), static_cast<double>(y)});
      const auto hit = trace(panels, ray);
      if (!hit) continue;
      const Vec3 c = shade(scene, *hit);
      for (int k = 0; k < 3; ++k) {
        v.rgb.at(x, y, k) = static_cast<float>(c[k]);
        v.normals.at(x, y, k) = static_cast<float>(hit->normal[k]);
      }
      v.depth.at(x, y) = static_cast<float>(hit->t * ray.direction.dot(forward));
    }
  }
  return v;
}

void apply_holes(ImageF& depth, double probability, int blobs, double blob_radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  if (probability > 0.0) {
    std::bernoulli_distribution drop(probability);
    for (float& d : depth.data) {
      if (drop(rng)) d = 0.0f;
    }
  }
  std::uniform_real_distribution<double> ux(0.0, depth.width), uy(0.0, depth.height);
  for (int b = 0; b < blobs; ++b) {
    const double cx = ux(rng), cy = uy(rng);
    for (int y = 0; y < depth.height; ++y) {
      for (int x = 0; x < depth.width; ++x) {
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= blob_radius * blob_radius) depth.at(x, y) = 0.0f;
      }
    }
  }
}

std::vector<Frame> generate_frames(const Scene& scene, std::size_t count, std::uint64_t seed,
                                   std::vector<View>* ground_truth) {
  std::vector<Frame> frames;
  frames.reserve(count);
  if (ground_truth) ground_truth->clear();
  for (std::size_t i = 0; i < count; ++i) {
    const Pose pose = trajectory_pose(scene.trajectory, i, count);
    View v = render_view(scene, pose);
    ImageF sensor = v.depth;
    apply_holes(sensor, scene.hole_probability, scene.hole_blobs, scene.blob_radius,
                seed * 0x9E3779B97F4A7C15ull + i);
    frames.push_back(make_frame(v.rgb, std::move(sensor), scene.intrinsics, pose, static_cast<int>(i)));
    if (ground_truth) ground_truth->push_back(std::move(v));
  }
  return frames;
}

void synth_generate(const Scene& scene, std::size_t count, std::uint64_t seed, const std::filesystem::path& out) {
  std::filesystem::create_directories(out / "frames");
  io::write_intrinsics(out / "intrinsics.txt", scene.intrinsics);
  std::vector<View> gt;
  const std::vector<Frame> frames = generate_frames(scene, count, seed, &gt);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::filesystem::path stem = io::frame_stem(out, i);
    io::write_png_rgb(stem.string() + ".color.png", frames[i].rgb);
    io::write_depth_png(stem.string() + ".depth.png", frames[i].sensor_depth);
    io::write_pose(stem.string() + ".pose.txt", frames[i].pose);
    io::write_float_image(stem.string() + ".gt_depth.f32", gt[i].depth);
    io::write_float_image(stem.string() + ".gt_normal.f32", gt[i].normals);
  }
}

SurfelMap sample_surfels(const Scene& scene, std::size_t count, std::uint64_t seed, std::size_t feature_dim) {
  const std::vector<Panel> panels = scene.all_panels();
  std::vector<double> cdf;
  double area = 0.0;
  for (const Panel& p : panels) {
    area += p.edge_u.cross(p.edge_v).norm();
    cdf.push_back(area);
  }
  SurfelMap map(feature_dim);
  if (count == 0 || area <= 0.0) return map;
  // Radius 1.2 x the mean spacing: about 1% of the surface stays uncovered.
  const double radius = 1.2 * std::sqrt(area / static_cast<double>(count));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<float> zeros(feature_dim, 0.0f);
  map.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double pick = unit(rng) * area;
    const std::size_t k = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), pick) - cdf.begin());
    const Panel& p = panels[std::min(k, panels.size() - 1)];
    const double s = unit(rng), t = unit(rng);
    SurfelGeometry g;
    g.position = (p.origin + s * p.edge_u + t * p.edge_v).cast<float>();
    g.normal = p.normal.cast<float>();
    g.radius = static_cast<float>(radius);
    g.weight = 1.0f;
    map.add(g, zeros);
  }
  return map;
}

Scene preset(const std::string& name, int width, int height) {
  Scene s;
  s.intrinsics = default_intrinsics(width, height);
  if (name == "room" || name == "room-b") {
    const bool b = name == "room-b";
    if (!b) {
      s.walls[0] = checker({0.85, 0.3, 0.25}, {0.95, 0.85, 0.75}, 0.4);
      s.walls[1] = gradient({0.2, 0.45, 0.8}, {0.9, 0.9, 0.6}, 0.8);
      s.walls[2] = checker({0.3, 0.7, 0.35}, {0.9, 0.9, 0.9}, 0.5);
      s.walls[3] = gradient({0.8, 0.6, 0.2}, {0.3, 0.2, 0.5}, 0.6);
      s.walls[4] = checker({0.55, 0.45, 0.35}, {0.25, 0.2, 0.15}, 0.5);
      s.walls[5] = {Pattern::solid, {0.9, 0.9, 0.9}, {0.9, 0.9, 0.9}, 1.0};
      s.boxes.push_back({{0.6, -1.4, 0.0}, {1.4, -0.6, 0.7}, checker({0.9, 0.8, 0.1}, {0.2, 0.2, 0.6}, 0.2)});
      s.boxes.push_back({{-1.5, 0.5, 0.0}, {-0.9, 1.3, 1.1}, gradient({0.7, 0.2, 0.6}, {0.2, 0.8, 0.8}, 0.5)});
    } else {
      s.walls[0] = gradient({0.3, 0.6, 0.9}, {0.95, 0.7, 0.5}, 0.7);
      s.walls[1] = checker({0.2, 0.25, 0.3}, {0.85, 0.8, 0.6}, 0.45);
      s.walls[2] = gradient({0.9, 0.4, 0.4}, {0.4, 0.9, 0.5}, 0.9);
      s.walls[3] = checker({0.6, 0.3, 0.8}, {0.95, 0.95, 0.8}, 0.35);
      s.walls[4] = gradient({0.35, 0.3, 0.25}, {0.7, 0.6, 0.45}, 1.0);
      s.walls[5] = {Pattern::solid, {0.8, 0.85, 0.9}, {0.8, 0.85, 0.9}, 1.0};
      s.boxes.push_back({{-1.2, -1.5, 0.0}, {-0.4, -0.8, 0.9}, checker({0.1, 0.6, 0.3}, {0.95, 0.9, 0.3}, 0.25)});
      s.boxes.push_back({{0.8, 0.7, 0.0}, {1.5, 1.5, 0.6}, gradient({0.9, 0.5, 0.1}, {0.3, 0.3, 0.9}, 0.4)});
      s.trajectory.start_deg = 40.0;
      s.light_dir = {-0.4, 0.3, 0.85};
    }
    return s;
  }
  if (name == "wall") {
    s.has_room = false;
    s.panels.push_back(make_panel({-6.0, -6.0, 2.0}, {12.0, 0.0, 0.0}, {0.0, 12.0, 0.0}, {0.0, 0.0, -1.0},
                                  checker({0.8, 0.35, 0.3}, {0.9, 0.85, 0.7}, 0.3)));
    s.light_dir = {0.0, 0.0, -1.0};
    s.trajectory.kind = TrajectoryKind::fixed;
    s.trajectory.sweep_start = Vec3::Zero();
    s.trajectory.look_dir = Vec3::UnitZ();
    s.trajectory.down = Vec3::UnitY();
    return s;
  }
  throw std::invalid_argument("unknown scene preset '" + name + "'");
}

Scene scene_from_config(const io::Config& c) {
  Scene s = preset(c.get_string("scene.preset", "room"), c.get_int("camera.width", 64), c.get_int("camera.height", 48));
  s.intrinsics.fx = c.get_double("camera.fx", s.intrinsics.fx);
  s.intrinsics.fy = c.get_double("camera.fy", s.intrinsics.fy);
  s.intrinsics.cx = c.get_double("camera.cx", s.intrinsics.cx);
  s.intrinsics.cy = c.get_double("camera.cy", s.intrinsics.cy);
  s.hole_probability = c.get_double("scene.hole_probability", s.hole_probability);
  s.hole_blobs = c.get_int("scene.hole_blobs", s.hole_blobs);
  s.blob_radius = c.get_double("scene.blob_radius", s.blob_radius);
  s.ambient = c.get_double("scene.ambient", s.ambient);
  s.light_dir = c.get_vec3("scene.light_dir", s.light_dir);
  Trajectory& t = s.trajectory;
  const std::string kind = c.get_string("trajectory.kind", "");
  if (kind == "orbit") t.kind = TrajectoryKind::orbit;
  else if (kind == "sweep") t.kind = TrajectoryKind::sweep;
  else if (kind == "fixed") t.kind = TrajectoryKind::fixed;
  else if (!kind.empty()) throw std::invalid_argument("config: unknown trajectory.kind '" + kind + "'");
  t.center = c.get_vec3("trajectory.center", t.center);
  t.radius = c.get_double("trajectory.radius", t.radius);
  t.start_deg = c.get_double("trajectory.start_deg", t.start_deg);
  t.arc_deg = c.get_double("trajectory.arc_deg", t.arc_deg);
  t.pitch_deg = c.get_double("trajectory.pitch_deg", t.pitch_deg);
  t.sweep_start = c.get_vec3("trajectory.start", t.sweep_start);
  t.sweep_end = c.get_vec3("trajectory.end", t.sweep_end);
  t.look_dir = c.get_vec3("trajectory.look_dir", t.look_dir);
  s.intrinsics.validate();
  return s;
}

}  // namespace nsurf::synth
