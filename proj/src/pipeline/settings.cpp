#include "nsurf/pipeline/settings.hpp"

namespace nsurf {

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "seed", "frames", "workers",
      "ingest.stride", "ingest.radius_follows_stride", "ingest.radius_scale", "ingest.min_cos", "ingest.weight_sigma",
      "refiner.kind", "refiner.tolerance", "refiner.max_iterations", "refiner.learned_range",
      "fusion.delta_depth", "fusion.k_candidates", "fusion.normal_angle_max", "fusion.scheme",
      "render.max_hits", "render.last_delta", "render.background",
      "train.lr", "train.lambda_depth", "train.keyframe_fraction", "train.unroll_window", "train.iterations",
      "train.rays_per_step", "train.seed", "train.cosine_decay",
      "scene.preset", "scene.hole_probability", "scene.hole_blobs", "scene.blob_radius", "scene.ambient",
      "scene.light_dir", "camera.width", "camera.height", "camera.fx", "camera.fy", "camera.cx", "camera.cy",
      "trajectory.kind", "trajectory.center", "trajectory.radius", "trajectory.start_deg", "trajectory.arc_deg",
      "trajectory.pitch_deg", "trajectory.start", "trajectory.end", "trajectory.look_dir"};
  return keys;
}

void apply_config(const io::Config& f, TrainConfig& c) {
  f.require_known(known_config_keys());
  IngestConfig& ingest = c.reconstruct.ingest;
  ingest.stride = f.get_int("ingest.stride", ingest.stride);
  ingest.radius_follows_stride = f.get_bool("ingest.radius_follows_stride", ingest.radius_follows_stride);
  ingest.init.radius_scale = f.get_double("ingest.radius_scale", ingest.init.radius_scale);
  ingest.init.min_cos = f.get_double("ingest.min_cos", ingest.init.min_cos);
  ingest.init.weight_sigma = f.get_double("ingest.weight_sigma", ingest.init.weight_sigma);

  DepthRefiner& r = c.reconstruct.refiner;
  if (f.has("refiner.kind")) r.kind = parse_refiner_kind(f.get_string("refiner.kind", ""));
  r.tolerance = f.get_double("refiner.tolerance", r.tolerance);
  r.max_iterations = f.get_int("refiner.max_iterations", r.max_iterations);
  r.learned_range = f.get_double("refiner.learned_range", r.learned_range);

  FusionConfig& fu = c.reconstruct.fusion;
  fu.delta_depth = f.get_double("fusion.delta_depth", fu.delta_depth);
  fu.k_candidates = f.get_int("fusion.k_candidates", fu.k_candidates);
  fu.normal_angle_max = f.get_double("fusion.normal_angle_max", fu.normal_angle_max);
  if (f.has("fusion.scheme")) fu.scheme = parse_fusion_scheme(f.get_string("fusion.scheme", ""));

  c.render.max_hits = f.get_int("render.max_hits", c.render.max_hits);
  c.render.last_delta = f.get_double("render.last_delta", c.render.last_delta);
  c.render.background = f.get_vec3("render.background", c.render.background);

  c.lr = f.get_double("train.lr", c.lr);
  c.lambda_depth = f.get_double("train.lambda_depth", c.lambda_depth);
  c.keyframe_fraction = f.get_double("train.keyframe_fraction", c.keyframe_fraction);
  c.reconstruct.keyframe_fraction = c.keyframe_fraction;
  c.unroll_window = f.get_int("train.unroll_window", c.unroll_window);
  c.iterations = f.get_int("train.iterations", c.iterations);
  c.rays_per_step = f.get_int("train.rays_per_step", c.rays_per_step);
  c.cosine_decay = f.get_bool("train.cosine_decay", c.cosine_decay);
  c.seed = static_cast<std::uint64_t>(f.get_int("train.seed", static_cast<int>(c.seed)));

  const int workers = f.get_int("workers", c.render.workers);
  c.render.workers = workers;
  c.reconstruct.fusion.workers = workers;
  c.validate();
}

}  // namespace nsurf
