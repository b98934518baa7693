#pragma once

#include <cstddef>
#include <functional>

namespace nsurf {

// Splits [0, n) into `workers` contiguous chunks and runs fn(begin, end) on
// each. workers <= 1 runs inline. Chunk boundaries depend only on n and
// workers, so callers that write disjoint outputs get identical results for
// any worker count.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace nsurf
