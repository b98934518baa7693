#include "nsurf/io/map_io.hpp"

#include <fstream>
#include <vector>

#include "nsurf/core/binary_io.hpp"

namespace nsurf::io {

void save_map(std::ostream& out, const SurfelMap& map) {
  binary::write_magic(out, "SMAP");
  binary::write_le<std::uint32_t>(out, kMapFormatVersion);
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(map.feature_dim()));
  binary::write_le<std::uint64_t>(out, map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const SurfelGeometry& g = map.geometry(i);
    for (int k = 0; k < 3; ++k) binary::write_le<float>(out, g.position[k]);
    for (int k = 0; k < 3; ++k) binary::write_le<float>(out, g.normal[k]);
    binary::write_le<float>(out, g.radius);
    binary::write_le<float>(out, g.weight);
    for (float v : map.feature(i)) binary::write_le<float>(out, v);
    binary::write_le<std::uint64_t>(out, g.id);
  }
}

void save_map(const std::filesystem::path& path, const SurfelMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  save_map(out, map);
  if (!out) throw FormatError(path.string() + ": write failed");
}

SurfelMap load_map(std::istream& in) {
  binary::expect_magic(in, "SMAP");
  const auto version = binary::read_le<std::uint32_t>(in);
  if (version != kMapFormatVersion) throw FormatError("unsupported map version " + std::to_string(version));
  const auto dim = binary::read_le<std::uint32_t>(in);
  const auto count = binary::read_le<std::uint64_t>(in);
  if (dim == 0 || dim > 4096) throw FormatError("implausible feature dimension");
  SurfelMap map(dim);
  // The count comes from the file; do not trust it for a large reservation.
  map.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  std::vector<float> feature(dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    SurfelGeometry g;
    for (int k = 0; k < 3; ++k) g.position[k] = binary::read_le<float>(in);
    for (int k = 0; k < 3; ++k) g.normal[k] = binary::read_le<float>(in);
    g.radius = binary::read_le<float>(in);
    g.weight = binary::read_le<float>(in);
    for (float& v : feature) v = binary::read_le<float>(in);
    g.id = binary::read_le<std::uint64_t>(in);
    try {
      map.add_with_id(g, feature);
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("invalid surfel record: ") + e.what());
    }
  }
  return map;
}

SurfelMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open");
  try {
    return load_map(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace nsurf::io
