#pragma once

#include <cstddef>
#include <functional>

namespace pprobit {

/// Worker cap: PPROBIT_THREADS if set (>= 1), else hardware concurrency.
unsigned default_threads();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Work is
/// handed out by index, so callers that write results into slot i get output
/// independent of scheduling. Calls made from inside a worker run serially.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

/// True while the calling thread is a parallel_for worker.
bool in_parallel_region();

}  // namespace pprobit
