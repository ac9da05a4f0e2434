#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace sglab::detail {

// Runs body(begin, end) over contiguous chunks of [0, count). Chunks are
// disjoint, so results written by index are independent of the thread count.
template <class Body>
void parallel_for(std::size_t count, int threads, Body body) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(threads > 0 ? threads : 1, count));
  if (workers == 1) {
    body(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&body, b, e] { body(b, e); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace sglab::detail
