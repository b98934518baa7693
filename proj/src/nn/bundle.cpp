#include "nsurf/nn/bundle.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>

#include "nsurf/nn/ops.hpp"

namespace nsurf::nn {
namespace {

void glorot(Parameter& p, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  for (Eigen::Index i = 0; i < p.value.values.size(); ++i) {
    p.value.values.data()[i] = dist(rng);
  }
}

void add_dense(NetworkBundle& b, const std::string& prefix, std::size_t in, std::size_t out,
               std::mt19937_64& rng) {
  glorot(b.add(prefix + ".weight", {in, out}), in, out, rng);
  b.add(prefix + ".bias", {out});
}

void add_conv(NetworkBundle& b, const std::string& prefix, std::size_t in, std::size_t out,
              std::mt19937_64& rng) {
  glorot(b.add(prefix + ".weight", {3, 3, in, out}), 9 * in, 9 * out, rng);
  b.add(prefix + ".bias", {out});
}

}  // namespace

NetworkBundle::NetworkBundle(const NetworkBundle& other) : config_(other.config_) {
  for (const auto& p : other.params_) {
    params_.push_back(std::make_unique<Parameter>(*p));
  }
}

NetworkBundle& NetworkBundle::operator=(const NetworkBundle& other) {
  if (this != &other) {
    NetworkBundle copy(other);
    *this = std::move(copy);
  }
  return *this;
}

NetworkBundle NetworkBundle::create(const NetworkConfig& c, std::uint64_t seed) {
  NetworkBundle b;
  b.config_ = c;
  std::mt19937_64 rng(seed);
  const auto f = static_cast<std::size_t>(c.feature_dim);
  add_conv(b, "extractor.conv1", 3, c.extractor_c1, rng);
  add_conv(b, "extractor.conv2", c.extractor_c1, c.extractor_c2, rng);
  add_conv(b, "extractor.conv3", c.extractor_c2, c.extractor_c3, rng);
  add_dense(b, "projector", c.extractor_channels(), f, rng);
  add_dense(b, "gru.z", 2 * f, f, rng);
  add_dense(b, "gru.r", 2 * f, f, rng);
  add_dense(b, "gru.t", 2 * f, f, rng);
  const auto hidden = static_cast<std::size_t>(c.shade_hidden);
  const auto feat = static_cast<std::size_t>(c.shade_feature);
  add_dense(b, "shade.feature.0", c.shade_feature_input(), hidden, rng);
  add_dense(b, "shade.feature.1", hidden, feat, rng);
  add_dense(b, "shade.sigma", feat + c.embed_width(3), 1, rng);
  std::size_t in = feat + c.embed_width(3);
  for (int layer = 0; layer < c.rgb_layers; ++layer) {
    const std::size_t out = (layer + 1 == c.rgb_layers) ? 3 : hidden;
    add_dense(b, "shade.rgb." + std::to_string(layer), in, out, rng);
    in = out;
  }
  if (c.learned_refiner) {
    const auto rc = static_cast<std::size_t>(c.refiner_channels);
    add_conv(b, "refiner.enc", 5, rc, rng);
    add_conv(b, "refiner.mid", rc, rc, rng);
    add_conv(b, "refiner.dec", 2 * rc, 1, rng);
  }
  return b;
}

Parameter& NetworkBundle::add(const std::string& name, std::vector<std::size_t> shape) {
  if (find(name) != nullptr) {
    throw std::invalid_argument("network bundle: duplicate parameter " + name);
  }
  params_.push_back(std::make_unique<Parameter>(name, Tensor::zeros(std::move(shape))));
  return *params_.back();
}

Parameter* NetworkBundle::find(const std::string& name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const Parameter* NetworkBundle::find(const std::string& name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

Parameter& NetworkBundle::get(const std::string& name) {
  if (Parameter* p = find(name)) return *p;
  throw std::out_of_range("network bundle: no parameter named " + name);
}

const Parameter& NetworkBundle::get(const std::string& name) const {
  if (const Parameter* p = find(name)) return *p;
  throw std::out_of_range("network bundle: no parameter named " + name);
}

std::vector<Parameter*> NetworkBundle::parameters() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> NetworkBundle::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<Parameter*> NetworkBundle::parameters_with_prefix(const std::vector<std::string>& prefixes) {
  std::vector<Parameter*> out;
  for (auto& p : params_) {
    for (const auto& prefix : prefixes) {
      if (p->name.rfind(prefix, 0) == 0) {
        out.push_back(p.get());
        break;
      }
    }
  }
  return out;
}

void NetworkBundle::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

void NetworkBundle::set_trainable(const std::vector<std::string>& prefixes, bool trainable) {
  for (Parameter* p : parameters_with_prefix(prefixes)) p->trainable = trainable;
}

std::size_t NetworkBundle::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

bool NetworkBundle::same_values(const NetworkBundle& other) const {
  if (params_.size() != other.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Parameter& a = *params_[i];
    const Parameter& b = *other.params_[i];
    if (a.name != b.name || a.value.shape != b.value.shape) return false;
    if (std::memcmp(a.value.data(), b.value.data(), a.value.size() * sizeof(double)) != 0) return false;
  }
  return true;
}

Var dense(Tape& t, NetworkBundle& nets, const std::string& prefix, Var x) {
  Var w = t.param(nets.get(prefix + ".weight"));
  Var b = t.param(nets.get(prefix + ".bias"));
  return add_bias(t, matmul(t, x, w), b);
}

Var conv3x3(Tape& t, NetworkBundle& nets, const std::string& prefix, Var image, int height, int width) {
  Var cols = im2col3x3(t, image, height, width);
  return dense(t, nets, prefix, cols);
}

Var gru_cell(Tape& t, NetworkBundle& nets, Var input, Var hidden) {
  Var xh = concat_cols(t, {input, hidden});
  Var z = sigmoid(t, dense(t, nets, "gru.z", xh));
  Var r = sigmoid(t, dense(t, nets, "gru.r", xh));
  Var rh = concat_cols(t, {mul(t, r, hidden), input});
  Var candidate = tanh(t, dense(t, nets, "gru.t", rh));
  return add(t, mul(t, one_minus(t, z), hidden), mul(t, z, candidate));
}

}  // namespace nsurf::nn
