#pragma once

#include <filesystem>
#include <iosfwd>

#include "nsurf/nn/bundle.hpp"

namespace nsurf::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Little-endian layout: "SNRF", u32 version, u32 tensor count, then per
// tensor: u16 name length, name bytes, u8 rank, u32 dims[rank], f32 data.
// Values are stored in single precision, so a bundle survives
// save -> load -> save byte-identically, and a loaded bundle round-trips
// exactly. Optimizer moments are not stored.
void save_checkpoint(const NetworkBundle& bundle, std::ostream& os);
void save_checkpoint(const NetworkBundle& bundle, const std::filesystem::path& path);
// Throws FormatError on bad magic, version or truncation. The network
// config is inferred from tensor shapes.
NetworkBundle load_checkpoint(std::istream& is);
NetworkBundle load_checkpoint(const std::filesystem::path& path);

// Rounds every value to the nearest float, as a save/load cycle would.
void quantize_to_float(NetworkBundle& bundle);

}  // namespace nsurf::nn
