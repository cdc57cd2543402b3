#pragma once

#include <cstdint>
#include <functional>

namespace mixlab {

/// Worker count for data-parallel scans: hardware concurrency, capped by the
/// MIXLAB_THREADS environment variable when set.
int worker_count();

/// Runs fn(begin, end) on contiguous chunks of [begin, end), one chunk per
/// worker. Chunk boundaries depend only on the range and worker count, so
/// per-chunk results are reproducible; callers combine them with
/// order-independent reductions (exists / max / integer sums).
void parallel_for_chunks(std::int64_t begin, std::int64_t end,
                         const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace mixlab
