#pragma once

#include <cstddef>
#include <functional>

namespace latdiff {

// Worker count used when a caller passes threads <= 0. Starts at 1.
int default_threads();
void set_default_threads(int threads);

// Runs body(i) for i in [0, count) on up to `threads` workers with static
// interleaved scheduling. Each index is handled by exactly one call, so any
// per-index computation is independent of the worker count. The first
// exception thrown by a worker is rethrown on the calling thread.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace latdiff
