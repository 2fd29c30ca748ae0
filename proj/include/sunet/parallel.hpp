#pragma once

#include <cstddef>
#include <functional>

namespace sunet {

/// Worker count: hardware concurrency, capped by SUNIV_THREADS when set to a
/// positive integer.
int thread_count();

/// Calls fn(i) for i in [0, n) on up to thread_count() threads. Callers write
/// results into per-index slots and reduce afterwards, so outputs do not
/// depend on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace sunet
