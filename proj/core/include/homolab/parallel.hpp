// Deterministic task-parallel loop. Work items are indexed; each item writes
// only to its own slot, so results do not depend on the schedule.
#pragma once

#include <cstdint>
#include <functional>

namespace homolab {

/// Number of worker threads: HOMOLAB_THREADS if set, else hardware count.
int max_threads();

/// Runs fn(i) for i in [0, n) on up to max_threads() workers. Exceptions are
/// captured and the first one rethrown after all workers finish.
void parallel_for(int64_t n, const std::function<void(int64_t)>& fn);

}  // namespace homolab
