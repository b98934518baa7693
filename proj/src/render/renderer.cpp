#include "nsurf/render/renderer.hpp"

#include <algorithm>
#include <stdexcept>

#include "nsurf/core/parallel.hpp"
#include "nsurf/nn/ops.hpp"

namespace nsurf {

namespace {

constexpr int kTilePixels = 256;

template <class S>
void render_tiles(const SurfelMap& map, const CameraIntrinsics& intr, const Pose& pose,
                  const nn::NetworkBundle& nets, const RenderConfig& config, const PixelSurfelBuffer& buffers,
                  ImageF& image) {
  const ShadingModel<S> model(nets);
  const PositionalEmbedding emb = PositionalEmbedding::from_config(nets.config());
  const std::size_t pixels = buffers.pixel_count();
  const std::size_t tiles = (pixels + kTilePixels - 1) / kTilePixels;
  const auto features = map.features();
  parallel_for(tiles, config.workers, [&](std::size_t tile_begin, std::size_t tile_end) {
    for (std::size_t tile = tile_begin; tile < tile_end; ++tile) {
      const std::size_t p0 = tile * kTilePixels;
      const std::size_t p1 = std::min(pixels, p0 + kTilePixels);
      HitInputs in(emb);
      for (std::size_t p = p0; p < p1; ++p) {
        const Ray ray = ray_through_pixel(intr, pose, {static_cast<double>(p % intr.width),
                                                       static_cast<double>(p / intr.width)});
        for (const SurfelHit& h : buffers.hits(p)) {
          in.add(static_cast<int>(h.surfel_index), map.geometry(h.surfel_index), h.hit_point, h.center_offset,
                 ray.direction);
        }
      }
      ColVector<S> sigma;
      RowMatrix<S> rgb;
      if (in.size() > 0) {
        RowMatrix<S> f(static_cast<Eigen::Index>(in.size()), features.cols());
        for (std::size_t i = 0; i < in.size(); ++i) {
          f.row(static_cast<Eigen::Index>(i)) = features.row(in.feature_rows()[i]).template cast<S>();
        }
        model.shade(model.interpolate(f, in), in, sigma, rgb);
      }
      std::size_t k = 0;
      std::vector<double> t, s;
      std::vector<Eigen::Vector3d> c;
      for (std::size_t p = p0; p < p1; ++p) {
        const auto hits = buffers.hits(p);
        t.clear();
        s.clear();
        c.clear();
        for (const SurfelHit& h : hits) {
          t.push_back(h.t);
          s.push_back(static_cast<double>(sigma(static_cast<Eigen::Index>(k))));
          c.push_back(rgb.row(static_cast<Eigen::Index>(k)).transpose().template cast<double>());
          ++k;
        }
        const Eigen::Vector3d color = composite(t, s, c, config).color;
        for (int ch = 0; ch < 3; ++ch) {
          image.data[p * 3 + static_cast<std::size_t>(ch)] = static_cast<float>(std::clamp(color[ch], 0.0, 1.0));
        }
      }
    }
  });
}

}  // namespace

ImageF render_image(const SurfelMap& map, const CameraIntrinsics& intr, const Pose& pose,
                    const nn::NetworkBundle& nets, const RenderConfig& config, RasterStats* stats) {
  config.validate();
  intr.validate();
  const PixelSurfelBuffer buffers = rasterize(map, intr, pose, config.max_hits, RasterOptions{config.workers});
  if (stats) *stats = raster_stats(buffers);
  ImageF image(intr.width, intr.height, 3);
  if (config.double_precision) {
    render_tiles<double>(map, intr, pose, nets, config, buffers, image);
  } else {
    render_tiles<float>(map, intr, pose, nets, config, buffers, image);
  }
  return image;
}

RayBatch prepare_rays(const SurfelMap& map, const PixelSurfelBuffer& buffers, const CameraIntrinsics& intr,
                      const Pose& pose, const std::vector<int>& pixels, const RenderConfig& config,
                      const PositionalEmbedding& emb) {
  RayBatch batch(emb);
  batch.pixels = pixels;
  batch.offsets.reserve(pixels.size() + 1);
  batch.offsets.push_back(0);
  std::vector<double> deltas;
  for (int p : pixels) {
    const Ray ray = ray_through_pixel(intr, pose, {static_cast<double>(p % intr.width),
                                                   static_cast<double>(p / intr.width)});
    const auto hits = buffers.hits(static_cast<std::size_t>(p));
    for (std::size_t i = 0; i < hits.size(); ++i) {
      const SurfelHit& h = hits[i];
      batch.hits.add(static_cast<int>(h.surfel_index), map.geometry(h.surfel_index), h.hit_point, h.center_offset,
                     ray.direction);
      deltas.push_back(i + 1 < hits.size() ? hits[i + 1].t - h.t : config.last_delta);
    }
    batch.offsets.push_back(static_cast<int>(batch.hits.size()));
  }
  batch.deltas = Eigen::Map<const nn::Vector>(deltas.data(), static_cast<Eigen::Index>(deltas.size()));
  return batch;
}

nn::Var render_rays(nn::Tape& t, nn::NetworkBundle& nets, nn::Var surfel_features, const RayBatch& batch,
                    const RenderConfig& config) {
  nn::Var sigma, rgb;
  if (batch.hits.size() > 0) {
    const ShadeVars shaded = shade_hits(t, nets, surfel_features, batch.hits);
    sigma = shaded.sigma;
    rgb = shaded.rgb;
  } else {
    sigma = t.constant(nn::Matrix::Zero(0, 1));
    rgb = t.constant(nn::Matrix::Zero(0, 3));
  }
  return nn::composite(t, sigma, rgb, batch.deltas, batch.offsets, config.background);
}

ImageF render_image_dense_baseline(const SurfelMap& map, const CameraIntrinsics& intr, const Pose& pose,
                                   const nn::NetworkBundle& nets, const RenderConfig& config, double step,
                                   double t_far) {
  config.validate();
  intr.validate();
  if (!(step > 0.0)) throw std::invalid_argument("dense baseline: step must be > 0");
  const std::size_t n = map.size();
  std::vector<float> px(n), py(n), pz(n), nx(n), ny(n), nz(n), r2(n);
  for (std::size_t j = 0; j < n; ++j) {
    const SurfelGeometry& g = map.geometry(j);
    px[j] = g.position.x();
    py[j] = g.position.y();
    pz[j] = g.position.z();
    nx[j] = g.normal.x();
    ny[j] = g.normal.y();
    nz[j] = g.normal.z();
    r2[j] = g.radius * g.radius;
  }
  const int samples = static_cast<int>(std::floor(t_far / step));
  const float half = static_cast<float>(0.5 * step);
  const ShadingModel<float> model(nets);
  const PositionalEmbedding emb = PositionalEmbedding::from_config(nets.config());
  const auto features = map.features();
  ImageF image(intr.width, intr.height, 3);
  const std::size_t pixels = static_cast<std::size_t>(intr.width) * intr.height;

  parallel_for(pixels, config.workers, [&](std::size_t begin, std::size_t end) {
    std::vector<float> score(n);
    for (std::size_t p = begin; p < end; ++p) {
      const Ray ray = ray_through_pixel(intr, pose, {static_cast<double>(p % intr.width),
                                                     static_cast<double>(p / intr.width)});
      HitInputs in(emb);
      std::vector<int> sample_of;
      for (int k = 1; k <= samples; ++k) {
        const Vec3 x = ray.at(k * step);
        const float x0 = static_cast<float>(x.x()), x1 = static_cast<float>(x.y()), x2 = static_cast<float>(x.z());
        int inside = 0;
        for (std::size_t j = 0; j < n; ++j) {
          const float dx = x0 - px[j], dy = x1 - py[j], dz = x2 - pz[j];
          const float pd = dx * nx[j] + dy * ny[j] + dz * nz[j];
          const float in_plane = dx * dx + dy * dy + dz * dz - pd * pd;
          score[j] = std::max(std::abs(pd) - half, in_plane - r2[j]);
          inside += score[j] <= 0.0f;
        }
        if (inside == 0) continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (score[j] > 0.0f) continue;
          const SurfelGeometry& g = map.geometry(j);
          const Vec3 d = x - g.position.cast<double>();
          const Vec3 nrm = g.normal.cast<double>();
          const double offset = (d - d.dot(nrm) * nrm).norm();
          if (!(offset <= g.radius)) continue;
          in.add(static_cast<int>(j), g, x, offset, ray.direction);
          sample_of.push_back(k);
        }
      }
      Eigen::Vector3d color = Eigen::Vector3d::Zero();
      double tau = 1.0;
      if (in.size() > 0) {
        RowMatrix<float> f(static_cast<Eigen::Index>(in.size()), features.cols());
        for (std::size_t i = 0; i < in.size(); ++i) f.row(static_cast<Eigen::Index>(i)) = features.row(in.feature_rows()[i]);
        ColVector<float> sigma;
        RowMatrix<float> rgb;
        model.shade(model.interpolate(f, in), in, sigma, rgb);
        std::size_t i = 0;
        while (i < in.size()) {
          const int k = sample_of[i];
          double density = 0.0;
          Eigen::Vector3d weighted = Eigen::Vector3d::Zero();
          for (; i < in.size() && sample_of[i] == k; ++i) {
            const double s = sigma(static_cast<Eigen::Index>(i));
            density += s;
            weighted += s * rgb.row(static_cast<Eigen::Index>(i)).transpose().cast<double>();
          }
          if (density <= 0.0) continue;
          const double next = tau * std::exp(-density * step);
          color += (tau - next) * (weighted / density);
          tau = next;
        }
      }
      color += tau * config.background;
      for (int ch = 0; ch < 3; ++ch) {
        image.data[p * 3 + static_cast<std::size_t>(ch)] = static_cast<float>(std::clamp(color[ch], 0.0, 1.0));
      }
    }
  });
  return image;
}

}  // namespace nsurf
