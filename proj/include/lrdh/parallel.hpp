#pragma once

#include <cstddef>
#include <functional>

namespace lrdh {

/// Worker count from an explicit request, then LRDH_THREADS, then 1.
int resolve_threads(int requested);

/// Runs fn(i) for i in [0, n) on `threads` workers. Work units must write only
/// to their own output slot; the first exception thrown is rethrown here.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace lrdh
