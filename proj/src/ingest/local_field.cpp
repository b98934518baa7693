#include "nsurf/ingest/local_field.hpp"

#include <stdexcept>

namespace nsurf {

std::vector<int> sample_pixels(int width, int height, int stride) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>((width + stride - 1) / stride) * ((height + stride - 1) / stride));
  for (int y = 0; y < height; y += stride) {
    for (int x = 0; x < width; x += stride) out.push_back(y * width + x);
  }
  return out;
}

LocalGeometry build_local_geometry(const Frame& frame, const ImageF& depth, const IngestConfig& config) {
  const auto& intr = frame.intrinsics;
  const std::vector<Vec3> normals = estimate_normals(depth, intr, frame.pose);
  const double footprint = config.radius_follows_stride ? config.stride : 1.0;
  LocalGeometry out;
  for (int p : sample_pixels(depth.width, depth.height, config.stride)) {
    const double d = depth.data[static_cast<std::size_t>(p)];
    if (!(d > 0.0)) continue;
    const PixelCoord px{static_cast<double>(p % depth.width), static_cast<double>(p / depth.width)};
    const Vec3 n_world = normals[static_cast<std::size_t>(p)];
    const Vec3 n_cam = frame.pose.rotation.transpose() * n_world;
    const RadiusWeight rw = init_radius_weight(d, n_cam, px, intr, footprint, config.init);
    SurfelGeometry g;
    g.id = out.surfels.size();
    g.position = unproject(intr, frame.pose, px, d).cast<float>();
    g.normal = n_world.cast<float>().normalized();
    g.radius = static_cast<float>(rw.radius);
    g.weight = static_cast<float>(rw.weight);
    out.surfels.push_back(g);
    out.pixels.push_back(p);
  }
  return out;
}

SurfelMap assemble_map(const LocalGeometry& geometry, const nn::Matrix& features) {
  if (features.rows() != static_cast<Eigen::Index>(geometry.surfels.size())) {
    throw std::invalid_argument("assemble_map: feature rows do not match surfel count");
  }
  SurfelMap map(static_cast<std::size_t>(features.cols()));
  map.reserve(geometry.surfels.size());
  std::vector<float> f(static_cast<std::size_t>(features.cols()));
  for (std::size_t i = 0; i < geometry.surfels.size(); ++i) {
    for (std::size_t c = 0; c < f.size(); ++c) {
      f[c] = static_cast<float>(features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
    }
    map.add(geometry.surfels[i], f);
  }
  return map;
}

SurfelMap build_local_surfels(const Frame& frame, const DepthRefiner& refiner, const FeatureExtractor& extractor,
                              nn::NetworkBundle& nets, const IngestConfig& config) {
  const ImageF depth = refine_depth(refiner, frame, &nets);
  const LocalGeometry geometry = build_local_geometry(frame, depth, config);
  nn::Tape t(false);
  const nn::Matrix& feats = t.value(extractor.extract(t, frame.rgb, geometry.pixels));
  return assemble_map(geometry, feats);
}

}  // namespace nsurf
