#pragma once

#include <cstddef>
#include <functional>

namespace sigsal {

// Worker count: SIGSAL_THREADS if set (>= 1), else hardware concurrency.
std::size_t thread_budget();

// Runs body(i) for i in [0, n) over contiguous blocks. Each index is visited
// exactly once; callers write results into per-index slots so the outcome
// does not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sigsal
