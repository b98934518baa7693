#include "nsurf/core/parallel.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace nsurf {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) {
    return;
  }
  if (workers <= 1 || n == 1) {
    fn(0, n);
    return;
  }
  const std::size_t chunks = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::vector<std::thread> threads;
  threads.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = n * c / chunks;
    const std::size_t end = n * (c + 1) / chunks;
    threads.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : threads) {
    t.join();
  }
}

}  // namespace nsurf
