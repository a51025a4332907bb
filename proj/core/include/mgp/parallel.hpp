#pragma once

#include <cstdint>
#include <functional>

namespace mgp {

// Worker count: MGP_THREADS env var if set, otherwise all hardware threads.
int worker_threads();

// Runs fn(i) for i in [0, count). Work is split into contiguous chunks, one
// per worker, so each index is processed exactly once by one thread; results
// are bit-identical for any worker count as long as fn(i) only writes state
// owned by index i. Falls back to a serial loop for small counts.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn);

// Chunked variant: fn(begin, end) per contiguous range. Lower overhead when
// the body is tiny.
void parallel_for_chunks(std::int64_t count,
                         const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace mgp
