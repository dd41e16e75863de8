// Copyright 2026 The tritrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "tritrace/error.hpp"

namespace tritrace {

/// Trials are grouped in fixed blocks; block boundaries, not worker count,
/// define every reduction.
inline constexpr std::size_t kTrialBlock = 1024;

/// Number of worker threads for a request: 0 means "auto".
inline unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Parses a workers value: a positive count or "auto".
inline unsigned parse_workers(const std::string& text) {
  if (text == "auto") return 0;
  std::size_t used = 0;
  long value = 0;
  try {
    value = std::stol(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || value < 1 || value > 4096) {
    throw InvalidArgument("workers must be a positive integer or 'auto', got '" + text + "'");
  }
  return static_cast<unsigned>(value);
}

/// Workers from the TRITRACE_WORKERS environment variable, or auto.
inline unsigned workers_from_environment() {
  const char* env = std::getenv("TRITRACE_WORKERS");
  if (env == nullptr || *env == '\0') return 0;
  return parse_workers(env);
}

/// Calls body(block, begin, end) for every block of `items` in blocks of
/// `block_size`. Blocks run concurrently; the first exception is rethrown.
template <class Body>
void for_each_block(std::size_t items, unsigned workers, Body&& body,
                    std::size_t block_size = kTrialBlock) {
  if (block_size == 0) throw InvalidArgument("block size must be positive");
  const std::size_t blocks = (items + block_size - 1) / block_size;
  if (blocks == 0) return;
  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), blocks));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto run = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t block = next.fetch_add(1);
      if (block >= blocks) return;
      const std::size_t begin = block * block_size;
      const std::size_t end = std::min(items, begin + block_size);
      try {
        body(block, begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };

  if (threads <= 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(run);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace tritrace
