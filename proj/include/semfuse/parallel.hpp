// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace semfuse {

/// Runs f(worker) for worker in [0, workers) on separate threads (worker 0 on
/// the calling thread) and rethrows the first exception.
template <typename F>
void run_workers(std::size_t workers, F&& f) {
  workers = std::max<std::size_t>(workers, 1);
  if (workers == 1) {
    f(std::size_t{0});
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  auto guarded = [&](std::size_t w) {
    try {
      f(w);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  std::vector<std::jthread> threads;
  threads.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(guarded, w);
  guarded(0);
  threads.clear();
  if (error) std::rethrow_exception(error);
}

/// Splits [0, n) into `parts` contiguous ranges; returns the bounds of part p.
[[nodiscard]] inline std::pair<std::size_t, std::size_t> chunk_range(std::size_t n, std::size_t parts,
                                                                     std::size_t p) {
  const std::size_t base = n / parts;
  const std::size_t extra = n % parts;
  const std::size_t begin = p * base + std::min(p, extra);
  return {begin, begin + base + (p < extra ? 1 : 0)};
}

}  // namespace semfuse
