#pragma once

#include <cstddef>
#include <functional>

namespace pide {

/// Runs fn(begin..end) split into contiguous chunks across up to n_threads
/// worker threads (0 = hardware concurrency). Falls back to a plain loop for
/// small ranges. Exceptions from workers are rethrown on the caller thread.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& fn, int n_threads = 0);

}  // namespace pide
