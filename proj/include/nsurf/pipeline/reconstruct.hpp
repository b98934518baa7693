#pragma once

#include <functional>
#include <vector>

#include "nsurf/fusion/fusion.hpp"
#include "nsurf/ingest/local_field.hpp"

namespace nsurf {

struct ReconstructConfig {
  IngestConfig ingest;
  DepthRefiner refiner;
  FusionConfig fusion;
  double keyframe_fraction = 0.05;
};

struct ReconstructResult {
  SurfelMap map;
  std::vector<FusionReport> reports;  // one per keyframe
  std::vector<std::size_t> keyframes;
  std::size_t local_surfels = 0;  // sum of local field sizes (no-fusion count)
};

// Called after every keyframe with the map as it stands.
using KeyframeCallback = std::function<void(std::size_t frame_index, const SurfelMap& map, const FusionReport& report)>;

// Streams keyframes in order through build_local_surfels and
// integrate_frame. Non-keyframes are never loaded.
ReconstructResult reconstruct_online(FrameSource& frames, nn::NetworkBundle& nets, const ReconstructConfig& config,
                                     const KeyframeCallback& on_keyframe = {});

// Same, over an explicit index list.
ReconstructResult reconstruct_frames(FrameSource& frames, const std::vector<std::size_t>& keyframes,
                                     nn::NetworkBundle& nets, const ReconstructConfig& config,
                                     const KeyframeCallback& on_keyframe = {});

}  // namespace nsurf
