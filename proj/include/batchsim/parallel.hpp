#pragma once

// Environment-axis parallelism. The step pipeline splits [0, B) into contiguous
// chunks; every per-environment computation is independent, so the chunking
// never changes results.

#include <algorithm>
#include <atomic>
#include <cstddef>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace batchsim {

namespace detail {
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> threads{1};
  return threads;
}
}  // namespace detail

/// Number of worker threads used along the environment axis (1 = serial).
inline void set_num_threads(int n) { detail::thread_setting().store(std::max(1, n)); }
inline int num_threads() { return detail::thread_setting().load(); }

/// Batches smaller than this are always stepped serially.
inline constexpr std::size_t kParallelMinBatch = 2048;

/// Calls f(begin, end) over disjoint chunks covering [0, batch).
template <class F>
void parallel_chunks(std::size_t batch, F&& f) {
  const int threads = num_threads();
#if defined(_OPENMP)
  if (threads > 1 && batch >= kParallelMinBatch) {
    const auto n = static_cast<std::ptrdiff_t>(threads);
#pragma omp parallel for num_threads(threads) schedule(static)
    for (std::ptrdiff_t c = 0; c < n; ++c) {
      const std::size_t begin = batch * static_cast<std::size_t>(c) / static_cast<std::size_t>(n);
      const std::size_t end = batch * static_cast<std::size_t>(c + 1) / static_cast<std::size_t>(n);
      if (begin < end) f(begin, end);
    }
    return;
  }
#endif
  (void)threads;
  f(std::size_t{0}, batch);
}

}  // namespace batchsim
