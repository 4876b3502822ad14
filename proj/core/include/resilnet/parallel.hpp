#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace resilnet {

/// Worker count: RESILNET_THREADS when set to a positive integer,
/// otherwise the hardware concurrency.
inline int thread_budget() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RESILNET_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, count). Each index is handled exactly once, so
/// results written to slot i do not depend on scheduling. The first
/// exception (lowest index) is rethrown after all workers finish.
template <class Fn>
void parallel_for(int count, Fn&& fn, int threads = thread_budget()) {
  if (count <= 0) return;
  threads = std::clamp(threads, 1, count);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  auto run = [&](int worker) {
    for (int i = worker; i < count; i += threads) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace resilnet
