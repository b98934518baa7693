#include "nsurf/pipeline/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "nsurf/io/metrics.hpp"
#include "nsurf/nn/ops.hpp"
#include "nsurf/pipeline/keyframes.hpp"

namespace nsurf {

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("train: lr must be > 0");
  if (!(lambda_depth >= 0.0)) throw std::invalid_argument("train: lambda_depth must be >= 0");
  if (!(keyframe_fraction > 0.0 && keyframe_fraction <= 1.0)) {
    throw std::invalid_argument("train: keyframe_fraction must be in (0, 1]");
  }
  if (unroll_window < 1) throw std::invalid_argument("train: unroll_window must be >= 1");
  if (iterations < 0) throw std::invalid_argument("train: iterations must be >= 0");
  if (rays_per_step < 1) throw std::invalid_argument("train: rays_per_step must be >= 1");
  reconstruct.fusion.validate();
  render.validate();
}

double TrainConfig::learning_rate(int step) const {
  if (!cosine_decay || iterations <= 0) return lr;
  const double progress = std::min(static_cast<double>(step), static_cast<double>(iterations)) / iterations;
  return lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

TrainScene TrainScene::split(std::vector<Frame> frames, double keyframe_fraction) {
  TrainScene s;
  s.keyframes = select_keyframes(frames.size(), keyframe_fraction);
  s.supervision = supervision_indices(frames.size(), s.keyframes);
  s.heldout = heldout_indices(frames.size(), s.keyframes);
  s.frames = std::move(frames);
  return s;
}

std::string StepLosses::csv_header() { return "step,L_render,L_d,L,wall_ms"; }

std::string StepLosses::csv_row() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.3f", step, render, depth, total, wall_ms);
  return buf;
}

std::vector<int> sample_rays(int width, int height, int count, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, width * height - 1);
  std::vector<int> out(static_cast<std::size_t>(count));
  for (int& p : out) p = pick(rng);
  return out;
}

namespace {

nn::Matrix target_colors(const Frame& frame, const std::vector<int>& pixels) {
  nn::Matrix out(static_cast<Eigen::Index>(pixels.size()), 3);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      out(static_cast<Eigen::Index>(i), c) = frame.rgb.data[static_cast<std::size_t>(pixels[i]) * 3 + c];
    }
  }
  return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

Trainer::Trainer(nn::NetworkBundle& nets, TrainConfig config)
    : nets_(&nets), config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
  if (config_.reconstruct.refiner.kind == RefinerKind::learned && !nets.has("refiner.enc.weight")) {
    throw std::invalid_argument("train: learned refiner selected but the bundle has no refiner");
  }
}

const ImageF& Trainer::base_depth(const Frame& frame) {
  auto it = base_depth_.find(frame.index);
  if (it == base_depth_.end()) {
    const DepthRefiner& r = config_.reconstruct.refiner;
    it = base_depth_.emplace(frame.index, diffusion_fill(frame.sensor_depth, frame.valid_mask, r.tolerance,
                                                         r.max_iterations)).first;
  }
  return it->second;
}

const Trainer::Program& Trainer::program(const TrainScene& scene) {
  const bool learned = config_.reconstruct.refiner.kind == RefinerKind::learned;
  if (cached_scene_ != &scene) {
    base_depth_.clear();
    buffers_.clear();
    program_.reset();
    cached_scene_ = &scene;
  }
  if (program_ && !learned) return *program_;
  const std::size_t dim = static_cast<std::size_t>(nets_->config().feature_dim);
  Program prog{SurfelMap(dim), {}, {}};
  const ReconstructConfig& rc = config_.reconstruct;
  for (std::size_t k : scene.keyframes) {
    const Frame& frame = scene.frames[k];
    ImageF depth;
    if (learned) {
      nn::Tape t(false);
      const nn::Matrix& v =
          t.value(refine_depth_learned(t, *nets_, frame, base_depth(frame), rc.refiner.learned_range));
      depth = ImageF(frame.width(), frame.height(), 1);
      for (std::size_t i = 0; i < depth.data.size(); ++i) depth.data[i] = static_cast<float>(v.data()[i]);
    } else {
      depth = refine_depth(rc.refiner, frame, nets_);
    }
    LocalGeometry lg = build_local_geometry(frame, depth, rc.ingest);
    const SurfelMap local = assemble_map(lg, nn::Matrix::Zero(static_cast<Eigen::Index>(lg.surfels.size()),
                                                              static_cast<Eigen::Index>(dim)));
    const AssociationResult assoc = associate(prog.geometry, local, frame.intrinsics, frame.pose, rc.fusion);
    FusionReport report;
    prog.traces.push_back(integrate_geometry(prog.geometry, local, assoc, report));
    prog.locals.push_back(std::move(lg));
  }
  program_ = std::move(prog);
  return *program_;
}

const PixelSurfelBuffer& Trainer::buffers(const Program& prog, const Frame& view, bool cacheable) {
  if (!cacheable) {
    scratch_buffers_ = rasterize(prog.geometry, view.intrinsics, view.pose, config_.render.max_hits);
    return scratch_buffers_;
  }
  auto it = buffers_.find(view.index);
  if (it == buffers_.end()) {
    it = buffers_.emplace(view.index, rasterize(prog.geometry, view.intrinsics, view.pose, config_.render.max_hits))
             .first;
  }
  return it->second;
}

StepLosses Trainer::step(const TrainScene& scene) {
  if (scene.keyframes.empty() || scene.supervision.empty()) {
    throw std::invalid_argument("train: scene needs keyframes and supervision views");
  }
  const auto start = std::chrono::steady_clock::now();
  const bool learned = config_.reconstruct.refiner.kind == RefinerKind::learned;
  const Program& prog = program(scene);
  const FeatureExtractor extractor(*nets_);
  const FusionScheme scheme = config_.reconstruct.fusion.scheme;
  const auto dim = static_cast<Eigen::Index>(nets_->config().feature_dim);
  const std::size_t count = scene.keyframes.size();
  const std::size_t window_start = count > static_cast<std::size_t>(config_.unroll_window)
                                       ? count - static_cast<std::size_t>(config_.unroll_window)
                                       : 0;

  // Keyframes before the unroll window: current parameters, no gradient.
  nn::Matrix prefix;
  {
    nn::Tape nt(false);
    nn::Var g = nt.constant(nn::Matrix::Zero(0, dim));
    for (std::size_t k = 0; k < window_start; ++k) {
      const Frame& frame = scene.frames[scene.keyframes[k]];
      const nn::Var local = extractor.extract(nt, frame.rgb, prog.locals[k].pixels);
      g = replay_feature_fusion(nt, *nets_, scheme, g, local, prog.traces[k]);
    }
    prefix = nt.value(g);
  }

  nn::Tape t(true);
  nn::Var g = t.constant(std::move(prefix));
  for (std::size_t k = window_start; k < count; ++k) {
    const Frame& frame = scene.frames[scene.keyframes[k]];
    const nn::Var local = extractor.extract(t, frame.rgb, prog.locals[k].pixels);
    g = replay_feature_fusion(t, *nets_, scheme, g, local, prog.traces[k]);
  }

  std::uniform_int_distribution<std::size_t> pick(0, scene.supervision.size() - 1);
  const Frame& view = scene.frames[scene.supervision[pick(rng_)]];
  const std::vector<int> pixels =
      sample_rays(view.width(), view.height(), config_.rays_per_step, rng_);
  const RayBatch batch = prepare_rays(prog.geometry, buffers(prog, view, !learned), view.intrinsics, view.pose,
                                      pixels, config_.render, PositionalEmbedding::from_config(nets_->config()));
  const nn::Var predicted = render_rays(t, *nets_, g, batch, config_.render);
  const nn::Var render_loss = nn::mse(t, predicted, target_colors(view, pixels));

  nn::Var loss = render_loss;
  double depth_value = 0.0;
  if (learned && config_.lambda_depth > 0.0) {
    std::vector<nn::Var> terms;
    for (std::size_t k = window_start; k < count; ++k) {
      const Frame& frame = scene.frames[scene.keyframes[k]];
      if (!frame.has_valid_depth()) continue;  // indicator = 0
      const nn::Var refined =
          refine_depth_learned(t, *nets_, frame, base_depth(frame), config_.reconstruct.refiner.learned_range);
      terms.push_back(depth_loss(t, refined, frame));
    }
    if (!terms.empty()) {
      const nn::Var depth_sum = nn::sum(t, nn::concat_rows(t, terms));
      const nn::Var depth_mean = nn::scale(t, depth_sum, 1.0 / static_cast<double>(terms.size()));
      depth_value = t.value(depth_mean)(0, 0);
      loss = nn::add(t, loss, nn::scale(t, depth_mean, config_.lambda_depth));
    }
  }

  nets_->zero_grad();
  t.backward(loss);
  const std::vector<nn::Parameter*> params = nets_->parameters();
  nn::adam_step(params, nn::AdamConfig{config_.learning_rate(steps_)});

  StepLosses out;
  out.step = ++steps_;
  out.render = t.value(render_loss)(0, 0);
  out.depth = depth_value;
  out.total = t.value(loss)(0, 0);
  out.wall_ms = elapsed_ms(start);
  return out;
}

std::vector<StepLosses> finetune_scene(SurfelMap& map, nn::NetworkBundle& nets, const std::vector<Frame>& views,
                                       const TrainConfig& config, const std::function<void(const StepLosses&)>& on_step) {
  config.validate();
  std::vector<StepLosses> log;
  if (config.iterations == 0 || map.empty()) return log;
  if (views.empty()) throw std::invalid_argument("finetune: no views");

  nn::Tensor init = nn::Tensor::zeros({map.size(), map.feature_dim()});
  init.values = map.features().cast<double>();
  nn::Parameter features("scene.features", std::move(init));

  std::vector<bool> was_trainable;
  for (nn::Parameter* p : nets.parameters()) was_trainable.push_back(p->trainable);
  nets.set_trainable({""}, false);
  nets.set_trainable({"shade."}, true);
  std::vector<nn::Parameter*> params = nets.parameters_with_prefix({"shade."});
  for (nn::Parameter* p : params) p->reset_optimizer();
  params.push_back(&features);

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, views.size() - 1);
  std::vector<std::optional<PixelSurfelBuffer>> cache(views.size());
  const PositionalEmbedding emb = PositionalEmbedding::from_config(nets.config());
  for (int it = 0; it < config.iterations; ++it) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t vi = pick(rng);
    const Frame& view = views[vi];
    if (!cache[vi]) cache[vi] = rasterize(map, view.intrinsics, view.pose, config.render.max_hits);
    const std::vector<int> pixels = sample_rays(view.width(), view.height(), config.rays_per_step, rng);
    const RayBatch batch = prepare_rays(map, *cache[vi], view.intrinsics, view.pose, pixels, config.render, emb);
    nn::Tape t(true);
    const nn::Var predicted = render_rays(t, nets, t.param(features), batch, config.render);
    const nn::Var loss = nn::mse(t, predicted, target_colors(view, pixels));
    nets.zero_grad();
    features.zero_grad();
    t.backward(loss);
    nn::adam_step(params, nn::AdamConfig{config.learning_rate(it)});
    StepLosses s;
    s.step = it + 1;
    s.render = s.total = t.value(loss)(0, 0);
    s.wall_ms = elapsed_ms(start);
    log.push_back(s);
    if (on_step) on_step(s);
  }

  map.features() = features.value.values.cast<float>();
  std::size_t i = 0;
  for (nn::Parameter* p : nets.parameters()) p->trainable = was_trainable[i++];
  return log;
}

double mean_psnr(const SurfelMap& map, nn::NetworkBundle& nets, const std::vector<Frame>& views,
                 const RenderConfig& config) {
  if (views.empty()) throw std::invalid_argument("mean_psnr: no views");
  double total = 0.0;
  for (const Frame& v : views) total += psnr(render_image(map, v.intrinsics, v.pose, nets, config), v.rgb);
  return total / static_cast<double>(views.size());
}

}  // namespace nsurf
