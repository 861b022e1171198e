#pragma once

#include <cstddef>
#include <functional>

namespace geomrazor {

/// Worker cap: GEOMRAZOR_THREADS if set (>= 1), otherwise the machine's
/// hardware concurrency.
std::size_t worker_count();

/// Runs fn(i) for every i in [0, n) across worker_count() threads.  Indices
/// are claimed dynamically; callers must write results into per-index slots
/// so the outcome is independent of scheduling.  Exceptions from fn are
/// captured and the first one rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace geomrazor
