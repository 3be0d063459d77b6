#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace mixphase {

/// Evaluates f(0) ... f(n-1) on up to `threads` workers and returns the
/// results in index order. The first exception (by index) is rethrown after
/// all workers have joined.
template <class F>
auto ordered_parallel_map(std::size_t n, unsigned threads, F&& f)
    -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);

  auto work = [&](std::atomic<std::size_t>& next) {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  std::atomic<std::size_t> next{0};
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(threads, 1u), std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    work(next);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back([&] { work(next); });
    for (auto& t : pool) t.join();
  }

  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace mixphase
