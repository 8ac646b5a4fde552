#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace bubblelab {

/// Process-wide worker count. Defaults to $BUBBLELAB_THREADS, else 1.
int thread_count();
void set_thread_count(int n);

/// Calls f(begin, end) on contiguous chunks of [0, n). Chunks are disjoint, so
/// callers that write to per-index slots get results independent of the split.
template <typename F>
void parallel_chunks(std::size_t n, F&& f, int threads = thread_count()) {
  const std::size_t t = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n));
  if (t <= 1) {
    f(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t - 1);
  const std::size_t step = (n + t - 1) / t;
  for (std::size_t k = 1; k < t; ++k) {
    const std::size_t b = k * step, e = std::min(n, b + step);
    if (b < e) pool.emplace_back([&f, b, e] { f(b, e); });
  }
  f(std::size_t{0}, std::min(n, step));
  for (auto& th : pool) th.join();
}

}  // namespace bubblelab
