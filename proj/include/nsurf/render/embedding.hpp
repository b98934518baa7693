#pragma once

#include <span>
#include <vector>

#include "nsurf/nn/bundle.hpp"

namespace nsurf {

// Per scalar x: [x (optional), sin(2^0 pi x), cos(2^0 pi x), ...,
// sin(2^(B-1) pi x), cos(2^(B-1) pi x)].
struct PositionalEmbedding {
  int num_bands = 5;
  bool include_input = true;

  int width_per_scalar() const { return 2 * num_bands + (include_input ? 1 : 0); }
  int width(int dims) const { return dims * width_per_scalar(); }

  static PositionalEmbedding from_config(const nn::NetworkConfig& c) {
    return {c.embedding_bands, c.embedding_include_input};
  }
};

std::vector<double> positional_encode(std::span<const double> x, const PositionalEmbedding& emb);

// Writes the encoding of x into out[0 .. emb.width(x.size())).
void positional_encode_into(std::span<const double> x, const PositionalEmbedding& emb, double* out);

}  // namespace nsurf
