#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace steinpi {

// Runs body(i) for i in [0, n) on up to `threads` workers. Work items are
// handed out dynamically; results must be written to disjoint locations.
// The first exception thrown by any worker is rethrown on the caller.
template <typename Index, typename Body>
void parallel_for(Index n, int threads, Body&& body) {
  const auto count = static_cast<std::int64_t>(n);
  const int workers = static_cast<int>(std::min<std::int64_t>(std::max(threads, 1), count));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < count; ++i) body(static_cast<Index>(i));
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::int64_t i = next++; i < count; i = next++) body(static_cast<Index>(i));
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace steinpi
