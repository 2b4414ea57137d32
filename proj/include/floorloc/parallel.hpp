#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace floorloc {

/// Worker count from FLOORLOC_WORKERS, or 1 when unset / unparsable.
inline int workers_from_env() {
  if (const char* v = std::getenv("FLOORLOC_WORKERS")) {
    try {
      const int n = std::stoi(v);
      if (n >= 1) return n;
    } catch (...) {
    }
  }
  return 1;
}

/// Runs fn(begin, end) over [0, n) split into contiguous static chunks.
/// Each chunk must write a disjoint output region; with that contract the
/// result does not depend on the worker count. The first exception thrown by
/// any chunk is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (n == 0) return;
  const std::size_t w = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, n);
  if (w == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> pool;
  pool.reserve(w - 1);
  const std::size_t chunk = n / w;
  const std::size_t rem = n % w;
  auto range = [&](std::size_t k) {
    const std::size_t b = k * chunk + std::min(k, rem);
    return std::pair{b, b + chunk + (k < rem ? 1 : 0)};
  };
  for (std::size_t k = 1; k < w; ++k) {
    pool.emplace_back([&, k] {
      try {
        auto [b, e] = range(k);
        fn(b, e);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  try {
    auto [b, e] = range(0);
    fn(b, e);
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace floorloc
