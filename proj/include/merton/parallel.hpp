#pragma once

#include <cstddef>
#include <functional>

namespace merton {

/// Worker cap: MERTON_THREADS when set to a positive integer, otherwise the
/// number of hardware threads (at least 1).
std::size_t worker_count();

/// Runs body(begin, end) over a static partition of [0, n). Callers write
/// per-index results into preallocated storage and reduce serially, so the
/// outcome does not depend on the number of workers. The first exception
/// thrown by any chunk is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t workers = worker_count());

}  // namespace merton
