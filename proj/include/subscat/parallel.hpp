#pragma once

#include <cstddef>
#include <functional>

namespace subscat {

// Worker count used when a call passes threads <= 0. Starts at the hardware
// concurrency; the CLI overrides it with --threads.
int default_threads();
void set_default_threads(int threads);

// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
// depend only on n and the thread count, and callers reduce per-index results
// in index order, so results do not depend on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace subscat
