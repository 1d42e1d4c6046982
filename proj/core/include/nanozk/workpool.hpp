#pragma once

#include <cstddef>
#include <functional>

namespace nanozk {

// Runs jobs 0..n_jobs-1 across `workers` threads. Results are whatever fn
// writes into caller-owned slots, so completion order never changes output
// order. Exceptions propagate to the caller.
void run_pool(size_t n_jobs, size_t workers, const std::function<void(size_t)>& fn);

}  // namespace nanozk
