#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nsurf/nn/adam.hpp"
#include "nsurf/pipeline/reconstruct.hpp"
#include "nsurf/render/renderer.hpp"

namespace nsurf {

struct TrainConfig {
  double lr = 1e-3;
  double lambda_depth = 0.1;
  double keyframe_fraction = 0.05;
  int unroll_window = 2;
  int iterations = 2000;
  std::uint64_t seed = 0;
  int rays_per_step = 512;
  // Cosine decay of lr to zero over `iterations` steps; constant otherwise.
  bool cosine_decay = true;
  ReconstructConfig reconstruct;
  RenderConfig render;

  void validate() const;
  // Learning rate for the 0-based step index.
  double learning_rate(int step) const;
};

// A posed RGB-D sequence split into keyframes (fused), supervision views
// (rendering loss) and held-out views (evaluation only).
struct TrainScene {
  std::vector<Frame> frames;
  std::vector<std::size_t> keyframes;
  std::vector<std::size_t> supervision;
  std::vector<std::size_t> heldout;

  static TrainScene split(std::vector<Frame> frames, double keyframe_fraction);
};

struct StepLosses {
  int step = 0;
  double render = 0.0;  // mean squared error over sampled pixels and channels
  double depth = 0.0;   // masked L1 of the refined depth, 0 without a learned refiner
  double total = 0.0;
  double wall_ms = 0.0;

  static std::string csv_header();
  std::string csv_row() const;
};

// End-to-end training of the extractor, GRU and shading networks (and the
// learned refiner, if present) on one scene.
//
// Each step re-fuses every keyframe. Feature gradients flow through the
// last `unroll_window` fusion steps only; earlier keyframes are fused with
// the current parameters but treated as constants. Surfel geometry is never
// differentiated.
class Trainer {
 public:
  Trainer(nn::NetworkBundle& nets, TrainConfig config);

  StepLosses step(const TrainScene& scene);

  const TrainConfig& config() const { return config_; }

 private:
  struct Program {
    SurfelMap geometry;                  // final map geometry, features unused
    std::vector<LocalGeometry> locals;   // one per keyframe
    std::vector<FusionTrace> traces;     // one per keyframe
  };

  const Program& program(const TrainScene& scene);
  const ImageF& base_depth(const Frame& frame);
  const PixelSurfelBuffer& buffers(const Program& prog, const Frame& view, bool cacheable);

  nn::NetworkBundle* nets_;
  TrainConfig config_;
  std::mt19937_64 rng_;
  int steps_ = 0;
  const TrainScene* cached_scene_ = nullptr;
  std::optional<Program> program_;
  std::map<int, ImageF> base_depth_;
  std::map<int, PixelSurfelBuffer> buffers_;
  PixelSurfelBuffer scratch_buffers_;
};

// Fine-tunes the stored surfel features and the shading networks on
// held-in views with everything else frozen. Geometry and surfel count are
// untouched. Returns the per-step losses.
std::vector<StepLosses> finetune_scene(SurfelMap& map, nn::NetworkBundle& nets, const std::vector<Frame>& views,
                                       const TrainConfig& config,
                                       const std::function<void(const StepLosses&)>& on_step = {});

// Mean PSNR of render_image against the frames' RGB.
double mean_psnr(const SurfelMap& map, nn::NetworkBundle& nets, const std::vector<Frame>& views,
                 const RenderConfig& config);

// Uniformly sampled pixel indices (with replacement).
std::vector<int> sample_rays(int width, int height, int count, std::mt19937_64& rng);

}  // namespace nsurf
