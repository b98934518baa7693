#include "nsurf/nn/checkpoint.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "nsurf/core/binary_io.hpp"

namespace nsurf::nn {
namespace {

constexpr char kMagic[5] = "SNRF";

NetworkConfig infer_config(const NetworkBundle& b) {
  NetworkConfig c;
  auto cols = [&](const std::string& name) { return static_cast<int>(b.get(name).value.shape.back()); };
  c.feature_dim = cols("projector.bias");
  c.extractor_c1 = cols("extractor.conv1.bias");
  c.extractor_c2 = cols("extractor.conv2.bias");
  c.extractor_c3 = cols("extractor.conv3.bias");
  c.shade_hidden = cols("shade.feature.0.bias");
  c.shade_feature = cols("shade.feature.1.bias");
  int layers = 0;
  while (b.has("shade.rgb." + std::to_string(layers) + ".weight")) ++layers;
  c.rgb_layers = layers;
  // The sigma head sees [feature, embed(x)]: recover the embedding layout.
  const int embed3 = static_cast<int>(b.get("shade.sigma.weight").value.shape.front()) - c.shade_feature;
  const int per_scalar = embed3 / 3;
  c.embedding_include_input = (per_scalar % 2) == 1;
  c.embedding_bands = (per_scalar - (c.embedding_include_input ? 1 : 0)) / 2;
  c.learned_refiner = b.has("refiner.enc.weight");
  if (c.learned_refiner) c.refiner_channels = cols("refiner.enc.bias");
  if (c.shade_feature_input() != static_cast<int>(b.get("shade.feature.0.weight").value.shape.front())) {
    throw FormatError("checkpoint: inconsistent shading network shapes");
  }
  return c;
}

}  // namespace

void save_checkpoint(const NetworkBundle& bundle, std::ostream& os) {
  const auto params = bundle.parameters();
  binary::write_magic(os, kMagic);
  binary::write_le<std::uint32_t>(os, kCheckpointVersion);
  binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    if (p->name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw std::invalid_argument("checkpoint: tensor name too long");
    }
    binary::write_le<std::uint16_t>(os, static_cast<std::uint16_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    binary::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(p->value.shape.size()));
    for (std::size_t d : p->value.shape) binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      binary::write_le<float>(os, static_cast<float>(p->value.data()[i]));
    }
  }
  if (!os) throw std::runtime_error("checkpoint: write failed");
}

void save_checkpoint(const NetworkBundle& bundle, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save_checkpoint(bundle, os);
}

NetworkBundle load_checkpoint(std::istream& is) {
  binary::expect_magic(is, kMagic);
  const auto version = binary::read_le<std::uint32_t>(is);
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto count = binary::read_le<std::uint32_t>(is);
  NetworkBundle bundle;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto len = binary::read_le<std::uint16_t>(is);
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw FormatError("checkpoint: truncated tensor name");
    const auto rank = binary::read_le<std::uint8_t>(is);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = binary::read_le<std::uint32_t>(is);
    Parameter& p = bundle.add(name, shape);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      p.value.data()[i] = static_cast<double>(binary::read_le<float>(is));
    }
  }
  try {
    bundle.set_config(infer_config(bundle));
  } catch (const std::out_of_range& e) {
    throw FormatError(std::string("checkpoint: missing tensor: ") + e.what());
  }
  return bundle;
}

NetworkBundle load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open checkpoint " + path.string());
  try {
    return load_checkpoint(is);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void quantize_to_float(NetworkBundle& bundle) {
  for (Parameter* p : bundle.parameters()) {
    p->value.values = p->value.values.cast<float>().cast<double>();
  }
}

}  // namespace nsurf::nn
