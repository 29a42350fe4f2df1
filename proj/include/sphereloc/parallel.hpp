#pragma once

#include <cstddef>
#include <functional>

namespace sphereloc {

/// Worker count: SPHERELOC_THREADS if set (>= 1), otherwise the hardware concurrency.
int worker_count();

/// Runs body(i) for i in [0, n) across worker threads; blocks until all finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sphereloc
