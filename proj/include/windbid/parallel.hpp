#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace windbid {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items must write
// only to their own output slots. If several items throw, the exception of
// the lowest index is rethrown so failures are reported deterministically.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (n <= 0) return;
  threads = std::clamp(threads, 1, n);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    pool.clear();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace windbid
