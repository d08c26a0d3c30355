#include "spectra/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spectra {

std::size_t configured_threads() {
  std::size_t requested = 0;
  if (const char* env = std::getenv("SPECTRA_THREADS")) {
    std::from_chars(env, env + std::strlen(env), requested);
  }
  if (requested == 0) {
    requested = std::max(1u, std::thread::hardware_concurrency());
  }
  return requested;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t threads) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  const std::size_t chunk = (n + threads - 1) / threads;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      workers.emplace_back([&, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace spectra
