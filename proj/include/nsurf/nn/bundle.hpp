#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nsurf/nn/tape.hpp"

namespace nsurf::nn {

// Widths of every learnable network. Defaults follow the reference
// architecture: 83 extracted channels projected to 32-dim surfel features,
// a 64 -> 32 GRU, and 256-wide shading MLPs.
struct NetworkConfig {
  int feature_dim = 32;
  int extractor_c1 = 32;
  int extractor_c2 = 27;
  int extractor_c3 = 24;
  int embedding_bands = 5;
  bool embedding_include_input = true;
  int shade_hidden = 256;
  int shade_feature = 256;  // F_f output width
  int rgb_layers = 4;
  bool learned_refiner = false;
  int refiner_channels = 8;

  int extractor_channels() const { return extractor_c1 + extractor_c2 + extractor_c3; }
  int embed_width(int dims) const { return dims * (2 * embedding_bands + (embedding_include_input ? 1 : 0)); }
  // [f, g(d), g(w), g(n), g(d - n)]
  int shade_feature_input() const { return feature_dim + embed_width(3) * 3 + embed_width(1); }
};

// Owns every learnable tensor by unique name.
class NetworkBundle {
 public:
  NetworkBundle() = default;
  NetworkBundle(const NetworkBundle& other);
  NetworkBundle& operator=(const NetworkBundle& other);
  NetworkBundle(NetworkBundle&&) noexcept = default;
  NetworkBundle& operator=(NetworkBundle&&) noexcept = default;

  // Glorot-uniform weights, zero biases, drawn from a seeded mt19937_64 in
  // declaration order.
  static NetworkBundle create(const NetworkConfig& config, std::uint64_t seed);

  const NetworkConfig& config() const { return config_; }
  void set_config(const NetworkConfig& c) { config_ = c; }

  Parameter& add(const std::string& name, std::vector<std::size_t> shape);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  bool has(const std::string& name) const { return find(name) != nullptr; }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  // Parameters whose name starts with one of the prefixes.
  std::vector<Parameter*> parameters_with_prefix(const std::vector<std::string>& prefixes);

  void zero_grad();
  void set_trainable(const std::vector<std::string>& prefixes, bool trainable);
  std::size_t parameter_count() const;

  // Bitwise equality of names, shapes and values.
  bool same_values(const NetworkBundle& other) const;

 private:
  NetworkConfig config_;
  std::vector<std::unique_ptr<Parameter>> params_;
};

// y = x W + b with W stored as [in, out] and b as [out].
Var dense(Tape& t, NetworkBundle& nets, const std::string& prefix, Var x);
// 3x3 same-padded convolution; weight [3,3,Cin,Cout], bias [Cout].
Var conv3x3(Tape& t, NetworkBundle& nets, const std::string& prefix, Var image, int height, int width);

// GRU cell with hidden state = global feature, input = incoming feature:
//   z = sigmoid(Mz [x, h]), r = sigmoid(Mr [x, h]),
//   c = tanh(Mt [r * h, x]), h' = (1 - z) * h + z * c.
Var gru_cell(Tape& t, NetworkBundle& nets, Var input, Var hidden);

}  // namespace nsurf::nn
