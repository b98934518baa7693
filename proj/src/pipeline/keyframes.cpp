#include "nsurf/pipeline/keyframes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nsurf {

std::vector<std::size_t> select_keyframes(std::size_t n, double fraction) {
  if (n == 0) throw std::invalid_argument("select_keyframes: empty sequence");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("select_keyframes: fraction must be in (0, 1]");
  // The small slack keeps 100 * 0.05 from rounding up to 6.
  const double exact = static_cast<double>(n) * fraction;
  std::size_t count = static_cast<std::size_t>(std::ceil(exact - 1e-9 * exact));
  count = std::clamp<std::size_t>(count, 1, n);
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = i * n / count;
  return out;
}

std::vector<std::size_t> heldout_indices(std::size_t n, const std::vector<std::size_t>& keyframes) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 8 == 3 && !std::binary_search(keyframes.begin(), keyframes.end(), i)) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> supervision_indices(std::size_t n, const std::vector<std::size_t>& keyframes) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 8 != 3 && !std::binary_search(keyframes.begin(), keyframes.end(), i)) out.push_back(i);
  }
  return out;
}

}  // namespace nsurf
