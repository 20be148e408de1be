// Chunked parallel-for with a fixed chunk decomposition, so reductions merge
// in chunk order and results do not depend on the worker count.
#ifndef TDLAB_PARALLEL_HPP
#define TDLAB_PARALLEL_HPP

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace tdlab {

inline int worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw > 16 ? 16 : hw);
}

// Splits [0, n) into `chunks` contiguous ranges and runs body(chunk_index,
// begin, end) across a pool.  The chunk grid is independent of the pool size.
inline void parallel_chunks(std::size_t n, int chunks,
                            const std::function<void(int, std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  if (chunks < 1) chunks = 1;
  if (static_cast<std::size_t>(chunks) > n) chunks = static_cast<int>(n);
  int workers = std::min(worker_count(), chunks);
  if (workers <= 1) {
    for (int c = 0; c < chunks; ++c) {
      std::size_t b = n * static_cast<std::size_t>(c) / static_cast<std::size_t>(chunks);
      std::size_t e = n * static_cast<std::size_t>(c + 1) / static_cast<std::size_t>(chunks);
      body(c, b, e);
    }
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      for (;;) {
        int c = next.fetch_add(1);
        if (c >= chunks) return;
        std::size_t b = n * static_cast<std::size_t>(c) / static_cast<std::size_t>(chunks);
        std::size_t e = n * static_cast<std::size_t>(c + 1) / static_cast<std::size_t>(chunks);
        body(c, b, e);
      }
    });
  for (std::thread& t : pool) t.join();
}

}  // namespace tdlab

#endif
