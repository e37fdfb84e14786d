#pragma once

#include <cstddef>
#include <functional>

namespace idewave {

/// Number of worker threads used by internal loops. Reads IDEWAVE_THREADS
/// once; falls back to std::thread::hardware_concurrency().
std::size_t thread_count();

/// Calls body(begin, end) on disjoint chunks covering [0, n). Chunks are
/// executed concurrently when more than one thread is available; callers
/// must only write to per-index outputs.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 1024);

}  // namespace idewave
