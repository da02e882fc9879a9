#pragma once

#include <cstddef>
#include <functional>

namespace rops {

/// Worker count: hardware concurrency, capped by the ROPS3D_THREADS
/// environment variable when set.
int effective_thread_count();

/// Runs fn(i) for i in [0, n) across worker threads. Results must be
/// written to index-addressed slots so the outcome is independent of the
/// execution schedule. Exceptions from workers are rethrown on the caller.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

} // namespace rops
