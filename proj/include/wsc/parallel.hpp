#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace wsc {

// Worker cap from WSC_THREADS (positive integer), else hardware concurrency.
std::size_t worker_count();

// Calls body(begin, end) over contiguous chunks of [0, n) on up to `workers`
// threads. Bodies must only write to per-index slots; results are then
// identical for every worker count. An exception from the lowest-index
// failing chunk is rethrown on the caller's thread.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t, std::size_t)>& body);

inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    parallel_for(n, worker_count(), body);
}

}  // namespace wsc
