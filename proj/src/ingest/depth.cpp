#include "nsurf/ingest/depth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nsurf/nn/ops.hpp"

namespace nsurf {

RefinerKind parse_refiner_kind(const std::string& name) {
  if (name == "identity") return RefinerKind::identity;
  if (name == "diffusion" || name == "diffusion-fill" || name == "diffusion_fill") {
    return RefinerKind::diffusion_fill;
  }
  if (name == "learned") return RefinerKind::learned;
  throw std::invalid_argument("unknown depth refiner: " + name);
}

ImageF diffusion_fill(const ImageF& depth, const Mask& valid, double tolerance, int max_iterations) {
  const int w = depth.width, h = depth.height;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < depth.data.size(); ++i) {
    if (valid.data[i]) {
      sum += depth.data[i];
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("no depth support");
  if (count == depth.data.size()) return depth;

  const double mean = sum / static_cast<double>(count);
  std::vector<double> cur(depth.data.size()), next;
  std::vector<int> holes;
  for (std::size_t i = 0; i < depth.data.size(); ++i) {
    if (valid.data[i]) {
      cur[i] = depth.data[i];
    } else {
      cur[i] = mean;
      holes.push_back(static_cast<int>(i));
    }
  }
  next = cur;
  for (int iter = 0; iter < max_iterations; ++iter) {
    double max_change = 0.0;
    for (int i : holes) {
      const int x = i % w, y = i / w;
      double acc = 0.0;
      int n = 0;
      if (x > 0) { acc += cur[i - 1]; ++n; }
      if (x + 1 < w) { acc += cur[i + 1]; ++n; }
      if (y > 0) { acc += cur[i - w]; ++n; }
      if (y + 1 < h) { acc += cur[i + w]; ++n; }
      const double v = n > 0 ? acc / n : cur[i];
      max_change = std::max(max_change, std::abs(v - cur[i]));
      next[i] = v;
    }
    std::swap(cur, next);
    if (max_change < tolerance) break;
  }
  ImageF out = depth;
  for (int i : holes) out.data[i] = static_cast<float>(cur[i]);
  return out;
}

nn::Var refine_depth_learned(nn::Tape& t, nn::NetworkBundle& nets, const Frame& frame, const ImageF& base,
                             double range) {
  const int w = frame.width(), h = frame.height();
  const auto n = static_cast<Eigen::Index>(w) * h;
  nn::Matrix input(n, 5);
  nn::Matrix base_col(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    base_col(i, 0) = base.data[i];
    input(i, 0) = base.data[i];
    input(i, 1) = frame.valid_mask.data[i] ? 1.0 : 0.0;
    for (int c = 0; c < 3; ++c) input(i, 2 + c) = frame.rgb.data[i * 3 + c] - 0.5;
  }
  nn::Var x = t.constant(std::move(input));
  nn::Var enc = nn::relu(t, nn::conv3x3(t, nets, "refiner.enc", x, h, w));
  const int hh = (h + 1) / 2, hw = (w + 1) / 2;
  nn::Var pooled = nn::avg_pool2(t, enc, h, w);
  nn::Var mid = nn::relu(t, nn::conv3x3(t, nets, "refiner.mid", pooled, hh, hw));
  std::vector<int> up(static_cast<std::size_t>(n));
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) up[static_cast<std::size_t>(y) * w + xx] = (y / 2) * hw + xx / 2;
  }
  nn::Var skip = nn::concat_cols(t, {enc, nn::gather_rows(t, mid, up)});
  nn::Var residual = nn::tanh(t, nn::conv3x3(t, nets, "refiner.dec", skip, h, w));
  nn::Var factor = nn::exp(t, nn::scale(t, residual, range));
  return nn::mul(t, t.constant(std::move(base_col)), factor);
}

ImageF refine_depth(const DepthRefiner& refiner, const Frame& frame, nn::NetworkBundle* nets) {
  if (!frame.has_valid_depth()) throw std::invalid_argument("no depth support");
  switch (refiner.kind) {
    case RefinerKind::identity:
      return frame.sensor_depth;
    case RefinerKind::diffusion_fill:
      return diffusion_fill(frame.sensor_depth, frame.valid_mask, refiner.tolerance, refiner.max_iterations);
    case RefinerKind::learned: {
      if (nets == nullptr || !nets->has("refiner.enc.weight")) {
        throw std::invalid_argument("learned depth refiner requires refiner parameters");
      }
      const ImageF base =
          diffusion_fill(frame.sensor_depth, frame.valid_mask, refiner.tolerance, refiner.max_iterations);
      nn::Tape t(false);
      const nn::Matrix& out = t.value(refine_depth_learned(t, *nets, frame, base, refiner.learned_range));
      ImageF result(frame.width(), frame.height(), 1);
      for (std::size_t i = 0; i < result.data.size(); ++i) {
        result.data[i] = static_cast<float>(out(static_cast<Eigen::Index>(i), 0));
      }
      return result;
    }
  }
  throw std::logic_error("unreachable refiner kind");
}

nn::Var depth_loss(nn::Tape& t, nn::Var refined, const Frame& frame) {
  const auto n = static_cast<Eigen::Index>(frame.sensor_depth.data.size());
  nn::Matrix target(n, 1), mask(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    target(i, 0) = frame.sensor_depth.data[i];
    mask(i, 0) = frame.valid_mask.data[i] ? 1.0 : 0.0;
  }
  return nn::masked_l1(t, refined, target, mask);
}

}  // namespace nsurf
