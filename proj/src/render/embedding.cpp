#include "nsurf/render/embedding.hpp"

#include <cmath>
#include <numbers>

namespace nsurf {

void positional_encode_into(std::span<const double> x, const PositionalEmbedding& emb, double* out) {
  for (double v : x) {
    if (emb.include_input) *out++ = v;
    double freq = std::numbers::pi;
    for (int k = 0; k < emb.num_bands; ++k) {
      *out++ = std::sin(freq * v);
      *out++ = std::cos(freq * v);
      freq *= 2.0;
    }
  }
}

std::vector<double> positional_encode(std::span<const double> x, const PositionalEmbedding& emb) {
  std::vector<double> out(static_cast<std::size_t>(emb.width(static_cast<int>(x.size()))));
  positional_encode_into(x, emb, out.data());
  return out;
}

}  // namespace nsurf
