#pragma once

#include <cstddef>
#include <functional>

namespace drf {

/// Worker count taken from DRF_THREADS (default 1). Cached after first read.
int thread_count();

/// Runs fn(i) for i in [0, n). With thread_count() > 1 the range is split
/// into contiguous blocks; callers must only write to disjoint state per i,
/// which keeps results identical for every thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace drf
