#pragma once

#include <cstddef>
#include <functional>

namespace spectra {

/// Worker count from SPECTRA_THREADS (unset or 0 means hardware concurrency).
std::size_t configured_threads();

/// Runs fn(i) for i in [0, n) over up to `threads` workers with static
/// contiguous chunking. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t threads = configured_threads());

}  // namespace spectra
