#pragma once

#include <cstddef>
#include <functional>

namespace ptmag {

/// Worker count for sweeps: hardware concurrency, capped by PTMAG_THREADS.
unsigned worker_count();

/// Calls body(i) for i in [0, n) on up to worker_count() threads. Iterations
/// must be independent. The first exception thrown is rethrown after all
/// workers have stopped.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ptmag
