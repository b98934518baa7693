#include <gtest/gtest.h>

#include <cstring>

#include "nsurf/io/synth.hpp"
#include "nsurf/pipeline/keyframes.hpp"
#include "nsurf/pipeline/reconstruct.hpp"
#include "nsurf/pipeline/settings.hpp"
#include "nsurf/pipeline/trainer.hpp"

namespace nsurf {
namespace {

class VectorSource : public FrameSource {
 public:
  explicit VectorSource(std::vector<Frame> frames) : frames_(std::move(frames)) {}
  std::size_t size() const override { return frames_.size(); }
  Frame frame(std::size_t index) override {
    ++loads;
    return frames_.at(index);
  }
  int loads = 0;

 private:
  std::vector<Frame> frames_;
};

std::vector<Frame> room_frames(std::size_t count, int w = 24, int h = 18) {
  synth::Scene scene = synth::preset("room", w, h);
  return synth::generate_frames(scene, count, 7);
}

std::uint64_t geometry_hash(const SurfelMap& m) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& g : m.geometries()) {
    const float v[8] = {g.position.x(), g.position.y(), g.position.z(), g.normal.x(),
                        g.normal.y(),   g.normal.z(),   g.radius,       g.weight};
    unsigned char bytes[sizeof v];
    std::memcpy(bytes, v, sizeof v);
    for (unsigned char b : bytes) h = (h ^ b) * 1099511628211ull;
    h = (h ^ g.id) * 1099511628211ull;
  }
  return h;
}

TEST(Keyframes, EvenlySpaced) {
  EXPECT_EQ(select_keyframes(100, 0.05), (std::vector<std::size_t>{0, 20, 40, 60, 80}));
  EXPECT_EQ(select_keyframes(3, 1.0), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(select_keyframes(1, 0.05), (std::vector<std::size_t>{0}));
  EXPECT_THROW(select_keyframes(10, 0.0), std::invalid_argument);
  EXPECT_THROW(select_keyframes(10, 1.5), std::invalid_argument);
}

TEST(Keyframes, SplitsArePartitions) {
  const std::size_t n = 40;
  const auto kf = select_keyframes(n, 0.1);
  const auto held = heldout_indices(n, kf);
  const auto sup = supervision_indices(n, kf);
  std::vector<int> seen(n, 0);
  for (auto v : {kf, held, sup}) {
    for (std::size_t i : v) ++seen[i];
  }
  for (int s : seen) EXPECT_EQ(s, 1);
  for (std::size_t i : held) EXPECT_EQ(i % 8, 3u);
}

TEST(Reconstruct, SingleKeyframeIsLocalField) {
  const std::vector<Frame> frames = room_frames(1);
  nn::NetworkBundle nets = nn::NetworkBundle::create({}, 3);
  VectorSource src(frames);
  ReconstructConfig cfg;
  const ReconstructResult r = reconstruct_online(src, nets, cfg);
  FeatureExtractor extractor(nets);
  const SurfelMap local = build_local_surfels(frames[0], cfg.refiner, extractor, nets, cfg.ingest);
  EXPECT_TRUE(r.map == local);
  EXPECT_EQ(r.local_surfels, local.size());
  ASSERT_EQ(r.reports.size(), 1u);
  EXPECT_EQ(r.reports[0].inserted, local.size());
  EXPECT_EQ(r.reports[0].merged, 0u);
}

TEST(Reconstruct, LoadsOnlyKeyframesAndIsDeterministic) {
  const std::vector<Frame> frames = room_frames(12);
  nn::NetworkBundle nets = nn::NetworkBundle::create({}, 3);
  ReconstructConfig cfg;
  cfg.keyframe_fraction = 0.25;
  VectorSource a(frames), b(frames);
  std::vector<std::size_t> called;
  std::vector<std::size_t> sizes;
  const ReconstructResult ra = reconstruct_online(a, nets, cfg, [&](std::size_t i, const SurfelMap& m, const FusionReport& rep) {
    called.push_back(i);
    sizes.push_back(m.size());
    EXPECT_EQ(rep.total_surfels, m.size());
  });
  EXPECT_EQ(a.loads, 3);
  EXPECT_EQ(called, (std::vector<std::size_t>{0, 4, 8}));
  EXPECT_EQ(sizes.back(), ra.map.size());
  for (std::size_t k = 1; k < sizes.size(); ++k) EXPECT_GE(sizes[k], sizes[k - 1]);
  cfg.fusion.workers = 3;
  const ReconstructResult rb = reconstruct_online(b, nets, cfg);
  EXPECT_TRUE(ra.map == rb.map);
}

TEST(Reconstruct, MapRendersAfterEveryKeyframe) {
  const std::vector<Frame> frames = room_frames(8);
  nn::NetworkBundle nets = nn::NetworkBundle::create({}, 3);
  ReconstructConfig cfg;
  cfg.keyframe_fraction = 0.5;
  VectorSource src(frames);
  int renders = 0;
  reconstruct_online(src, nets, cfg, [&](std::size_t i, const SurfelMap& m, const FusionReport&) {
    RasterStats stats;
    const ImageF img = render_image(m, frames[i].intrinsics, frames[i].pose, nets, RenderConfig{}, &stats);
    EXPECT_EQ(img.width, frames[i].intrinsics.width);
    EXPECT_GT(stats.coverage, 0.95);
    ++renders;
  });
  EXPECT_EQ(renders, 4);
}

TEST(Trainer, RenderLossVanishesOnOwnRenders) {
  std::vector<Frame> frames = room_frames(4, 16, 12);
  nn::NetworkBundle nets = nn::NetworkBundle::create({}, 5);
  ReconstructConfig rc;
  rc.keyframe_fraction = 0.5;
  VectorSource src(frames);
  SurfelMap map = reconstruct_online(src, nets, rc).map;
  RenderConfig render;
  render.double_precision = true;
  std::vector<Frame> views;
  for (const Frame& f : frames) {
    ImageF rgb = render_image(map, f.intrinsics, f.pose, nets, render);
    views.push_back(make_frame(std::move(rgb), f.sensor_depth, f.intrinsics, f.pose, f.index));
  }
  TrainConfig tc;
  tc.iterations = 1;
  tc.render = render;
  const auto losses = finetune_scene(map, nets, views, tc);
  ASSERT_EQ(losses.size(), 1u);
  EXPECT_LT(losses[0].render, 1e-12);
}

TEST(Trainer, DepthLossZeroWithoutLearnedRefiner) {
  TrainScene scene = TrainScene::split(room_frames(8, 16, 12), 0.25);
  nn::NetworkBundle nets = nn::NetworkBundle::create({}, 5);
  TrainConfig tc;
  tc.keyframe_fraction = 0.25;
  tc.rays_per_step = 32;
  for (RefinerKind kind : {RefinerKind::identity, RefinerKind::diffusion_fill}) {
    tc.reconstruct.refiner.kind = kind;
    Trainer trainer(nets, tc);
    const StepLosses s = trainer.step(scene);
    EXPECT_EQ(s.depth, 0.0);
    EXPECT_GT(s.render, 0.0);
    EXPECT_DOUBLE_EQ(s.total, s.render);
  }
}

TEST(Trainer, StepChangesOnlyTrainableParameters) {
  TrainScene scene = TrainScene::split(room_frames(8, 16, 12), 0.25);
  nn::NetworkBundle nets = nn::NetworkBundle::create({}, 5);
  const nn::NetworkBundle before = nets;
  TrainConfig tc;
  tc.keyframe_fraction = 0.25;
  tc.rays_per_step = 32;
  Trainer trainer(nets, tc);
  trainer.step(scene);
  bool changed = false;
  for (const nn::Parameter* p : nets.parameters()) changed |= !(p->value.values == before.get(p->name).value.values);
  EXPECT_TRUE(changed);
}

TEST(Finetune, ZeroIterationsIsIdentity) {
  std::vector<Frame> frames = room_frames(4, 16, 12);
  nn::NetworkBundle nets = nn::NetworkBundle::create({}, 5);
  VectorSource src(frames);
  ReconstructConfig rc;
  rc.keyframe_fraction = 0.5;
  SurfelMap map = reconstruct_online(src, nets, rc).map;
  const SurfelMap copy = map;
  TrainConfig tc;
  tc.iterations = 0;
  EXPECT_TRUE(finetune_scene(map, nets, frames, tc).empty());
  EXPECT_TRUE(map == copy);
}

TEST(Finetune, GeometryUntouched) {
  std::vector<Frame> frames = room_frames(4, 16, 12);
  nn::NetworkBundle nets = nn::NetworkBundle::create({}, 5);
  VectorSource src(frames);
  ReconstructConfig rc;
  rc.keyframe_fraction = 0.5;
  SurfelMap map = reconstruct_online(src, nets, rc).map;
  const SurfelMap copy = map;
  const std::uint64_t h = geometry_hash(map);
  const nn::NetworkBundle before = nets;
  TrainConfig tc;
  tc.iterations = 3;
  tc.rays_per_step = 64;
  tc.lr = 1e-2;
  const auto losses = finetune_scene(map, nets, frames, tc);
  EXPECT_EQ(losses.size(), 3u);
  EXPECT_EQ(geometry_hash(map), h);
  EXPECT_EQ(map.size(), copy.size());
  EXPECT_FALSE(map.features() == copy.features());
  for (const nn::Parameter* p : nets.parameters()) {
    const bool same = p->value.values == before.get(p->name).value.values;
    EXPECT_EQ(same, p->name.rfind("shade.", 0) != 0) << p->name;
  }
}

TEST(Settings, ConfigOverridesAndUnknownKeys) {
  TrainConfig tc;
  apply_config(io::Config::parse("[train]\nlr = 0.5\n[fusion]\nscheme = weighted_sum\n[render]\nmax_hits = 8\n"), tc);
  EXPECT_DOUBLE_EQ(tc.lr, 0.5);
  EXPECT_EQ(tc.reconstruct.fusion.scheme, FusionScheme::weighted_sum);
  EXPECT_EQ(tc.render.max_hits, 8);
  EXPECT_THROW(apply_config(io::Config::parse("[train]\nnonsense = 1\n"), tc), std::invalid_argument);
}

}  // namespace
}  // namespace nsurf
