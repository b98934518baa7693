#pragma once

#include <filesystem>
#include <iosfwd>

#include "nsurf/core/surfel_map.hpp"

namespace nsurf::io {

inline constexpr std::uint32_t kMapFormatVersion = 1;

// "SMAP", u32 version, u32 feature_dim, u64 count, then per surfel
// little-endian f32 position[3], normal[3], radius, weight, feature[F] and
// a u64 id. Storage order is preserved.
void save_map(std::ostream& out, const SurfelMap& map);
void save_map(const std::filesystem::path& path, const SurfelMap& map);

// Throws FormatError on bad magic, unknown version, truncation or duplicate
// ids; nothing is returned in that case.
SurfelMap load_map(std::istream& in);
SurfelMap load_map(const std::filesystem::path& path);

}  // namespace nsurf::io
