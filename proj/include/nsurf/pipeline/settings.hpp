#pragma once

#include <set>
#include <string>

#include "nsurf/io/config.hpp"
#include "nsurf/pipeline/trainer.hpp"

namespace nsurf {

// Keys understood by apply_config (sections ingest, refiner, fusion,
// render, train) and by synth::scene_from_config (scene, camera,
// trajectory), plus the top-level seed/frames/workers.
const std::set<std::string>& known_config_keys();

// Overrides fields of `config` with the keys present in `file`.
void apply_config(const io::Config& file, TrainConfig& config);

}  // namespace nsurf
