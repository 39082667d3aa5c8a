#pragma once

#include <cstddef>
#include <functional>

namespace qoct {

// Runs task(0) .. task(count-1) on up to `workers` threads and waits for all
// of them.  Index assignment is dynamic but each index runs exactly once, so
// callers that write results[i] get a deterministic merge regardless of the
// worker count.  With workers <= 1 everything runs inline on the caller.
// The first exception (by task index) is rethrown after all tasks finish.
void run_indexed_tasks(std::size_t count, std::size_t workers,
                       const std::function<void(std::size_t)>& task);

} // namespace qoct
