#pragma once

#include <cstddef>
#include <functional>

namespace motok {

/// Worker count from MOTOK_THREADS (0 or unset = hardware concurrency).
unsigned worker_count();

/// Calls fn(i) for i in [0, n) across worker_count() threads. Each index is visited
/// exactly once; callers write results by index so output order never depends on
/// scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace motok
