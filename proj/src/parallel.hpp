#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace gibbslab::detail {

inline int thread_count() {
  if (const char* env = std::getenv("GIBBSLAB_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(begin, end) over disjoint chunks of [0, n). Each index must be
/// computed independently (writes to disjoint slots only), which keeps the
/// result identical for every thread count.
template <typename Fn>
void parallel_for(std::int64_t n, Fn&& fn, std::int64_t min_chunk = 4096) {
  int threads = thread_count();
  if (threads <= 1 || n <= min_chunk) {
    fn(std::int64_t{0}, n);
    return;
  }
  std::int64_t chunks = std::min<std::int64_t>(threads, (n + min_chunk - 1) / min_chunk);
  std::int64_t step = (n + chunks - 1) / chunks;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(chunks));
  for (std::int64_t c = 0; c < chunks; ++c) {
    std::int64_t begin = c * step;
    std::int64_t end = std::min(n, begin + step);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace gibbslab::detail
