#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace odmwatch {

inline unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Splits [0, n) into `chunks` contiguous ranges and runs fn(chunk, begin, end)
// on up to `workers` threads. Chunk boundaries depend only on n and chunks.
template <typename Fn>
void parallel_chunks(std::size_t n, std::size_t chunks, unsigned workers, Fn&& fn) {
  chunks = std::max<std::size_t>(1, std::min(chunks, std::max<std::size_t>(n, 1)));
  auto bounds = [&](std::size_t c) { return n * c / chunks; };
  workers = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c, bounds(c), bounds(c + 1));
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          for (std::size_t c = w; c < chunks; c += workers) fn(c, bounds(c), bounds(c + 1));
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace odmwatch
