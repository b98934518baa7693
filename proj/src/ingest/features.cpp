#include "nsurf/ingest/features.hpp"

#include <numeric>
#include <stdexcept>

#include "nsurf/nn/ops.hpp"

namespace nsurf {

nn::Var FeatureExtractor::pyramid(nn::Tape& t, const ImageF& rgb, const std::vector<int>& pixels) const {
  if (rgb.channels != 3) throw std::invalid_argument("feature extractor: expected an RGB image");
  const int w = rgb.width, h = rgb.height;
  const auto n = static_cast<Eigen::Index>(w) * h;
  nn::Matrix input(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) input(i, c) = rgb.data[static_cast<std::size_t>(i) * 3 + c] - 0.5;
  }
  nn::Var x = t.constant(std::move(input));
  nn::Var l1 = nn::relu(t, nn::conv3x3(t, *nets_, "extractor.conv1", x, h, w));
  const int w2 = (w + 1) / 2, h2 = (h + 1) / 2;
  nn::Var l2 = nn::relu(t, nn::conv3x3(t, *nets_, "extractor.conv2", nn::avg_pool2(t, l1, h, w), h2, w2));
  const int w3 = (w2 + 1) / 2, h3 = (h2 + 1) / 2;
  nn::Var l3 = nn::relu(t, nn::conv3x3(t, *nets_, "extractor.conv3", nn::avg_pool2(t, l2, h2, w2), h3, w3));

  std::vector<int> i1(pixels.size()), i2(pixels.size()), i3(pixels.size());
  for (std::size_t k = 0; k < pixels.size(); ++k) {
    const int p = pixels[k];
    if (p < 0 || p >= w * h) throw std::invalid_argument("feature extractor: pixel index out of range");
    const int px = p % w, py = p / w;
    i1[k] = p;
    i2[k] = (py / 2) * w2 + px / 2;
    i3[k] = (py / 4) * w3 + px / 4;
  }
  return nn::concat_cols(t, {nn::gather_rows(t, l1, i1), nn::gather_rows(t, l2, i2), nn::gather_rows(t, l3, i3)});
}

nn::Var FeatureExtractor::extract(nn::Tape& t, const ImageF& rgb, const std::vector<int>& pixels) const {
  return nn::dense(t, *nets_, "projector", pyramid(t, rgb, pixels));
}

nn::Matrix FeatureExtractor::feature_map(const ImageF& rgb) const {
  std::vector<int> all(rgb.pixel_count());
  std::iota(all.begin(), all.end(), 0);
  nn::Tape t(false);
  return t.value(extract(t, rgb, all));
}

}  // namespace nsurf
