#ifndef PERCLOUD_PARALLEL_HPP
#define PERCLOUD_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace percloud {

inline unsigned default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Contiguous chunk decomposition of [0, n): chunk w covers
// [w*chunk_size, min(n, (w+1)*chunk_size)). Guaranteed stable so callers can
// combine per-chunk results in chunk order for thread-count-independent
// output.
struct ChunkPlan {
  std::size_t chunks = 1;
  std::size_t chunk_size = 0;

  ChunkPlan(std::size_t n, unsigned threads) {
    chunks = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
    chunk_size = chunks == 0 ? n : (n + chunks - 1) / chunks;
  }
};

// Runs fn(chunk_id, begin, end) over the ChunkPlan decomposition. Chunks
// write disjoint slots, so results are identical for any thread count.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
  if (n == 0) return;
  const ChunkPlan plan(n, threads);
  if (plan.chunks <= 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(plan.chunks);
  for (std::size_t w = 0; w < plan.chunks; ++w) {
    const std::size_t begin = w * plan.chunk_size;
    const std::size_t end = std::min(n, begin + plan.chunk_size);
    if (begin >= end) break;
    pool.emplace_back([&fn, w, begin, end] { fn(w, begin, end); });
  }
  for (auto& t : pool) t.join();
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n < 2048) {
    if (n > 0) fn(std::size_t{0}, n);
    return;
  }
  parallel_chunks(n, threads,
                  [&fn](std::size_t, std::size_t begin, std::size_t end) {
                    fn(begin, end);
                  });
}

}  // namespace percloud

#endif
