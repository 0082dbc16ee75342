#pragma once

// Internal helper: split [0, count) into contiguous per-worker ranges.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace rankone::detail {

// Calls fn(worker, begin, end) for each non-empty range; worker 0 runs on the
// calling thread. The first exception thrown by any worker is rethrown.
template <class Fn>
void parallel_ranges(std::size_t workers, std::uint64_t count, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min<std::uint64_t>(workers, std::max<std::uint64_t>(count, 1)));
  if (workers == 1) {
    fn(std::size_t{0}, std::uint64_t{0}, count);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  auto run = [&](std::size_t w) {
    const std::uint64_t begin = count * w / workers;
    const std::uint64_t end = count * (w + 1) / workers;
    try {
      if (begin < end) fn(w, begin, end);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(run, w);
  run(0);
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace rankone::detail
