#include "nsurf/pipeline/reconstruct.hpp"

#include "nsurf/pipeline/keyframes.hpp"

namespace nsurf {

ReconstructResult reconstruct_frames(FrameSource& frames, const std::vector<std::size_t>& keyframes,
                                     nn::NetworkBundle& nets, const ReconstructConfig& config,
                                     const KeyframeCallback& on_keyframe) {
  config.fusion.validate();
  ReconstructResult result{SurfelMap(static_cast<std::size_t>(nets.config().feature_dim)), {}, keyframes, 0};
  const FeatureExtractor extractor(nets);
  for (std::size_t index : keyframes) {
    const Frame frame = frames.frame(index);
    const SurfelMap local = build_local_surfels(frame, config.refiner, extractor, nets, config.ingest);
    result.local_surfels += local.size();
    result.reports.push_back(integrate_frame(result.map, local, frame.intrinsics, frame.pose, config.fusion, nets,
                                             frame.index));
    if (on_keyframe) on_keyframe(index, result.map, result.reports.back());
  }
  return result;
}

ReconstructResult reconstruct_online(FrameSource& frames, nn::NetworkBundle& nets, const ReconstructConfig& config,
                                     const KeyframeCallback& on_keyframe) {
  return reconstruct_frames(frames, select_keyframes(frames.size(), config.keyframe_fraction), nets, config,
                            on_keyframe);
}

}  // namespace nsurf
