#pragma once

#include <cstddef>
#include <vector>

namespace nsurf {

// ceil(n * fraction) evenly spaced indices starting at 0.
std::vector<std::size_t> select_keyframes(std::size_t n, double fraction);

// Evaluation views: non-keyframes with index % 8 == 3.
std::vector<std::size_t> heldout_indices(std::size_t n, const std::vector<std::size_t>& keyframes);

// Rendering supervision views: everything that is neither a keyframe nor
// held out.
std::vector<std::size_t> supervision_indices(std::size_t n, const std::vector<std::size_t>& keyframes);

}  // namespace nsurf
