#pragma once

// Deterministic fork-join helper for embarrassingly parallel run batches.
// Results must be written by index so scheduling never shows in output.

#include <cstddef>
#include <functional>

namespace onn {

/// Worker count: requested if > 0, else hardware concurrency, then capped
/// by the OSC_CONN_THREADS environment variable (integer >= 1) when set.
/// Never less than 1.
int effective_threads(int requested);

/// Run fn(0..n-1) across `threads` workers in contiguous blocks. Exceptions
/// from workers are rethrown (the first one, by block order). threads <= 1
/// or tiny n degrades to a plain loop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace onn
