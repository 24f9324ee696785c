#ifndef GVCOD_PARALLEL_HPP_
#define GVCOD_PARALLEL_HPP_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace gvcod {

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks, one per
// worker, and each chunk runs in index order. Callers must only write to
// disjoint output slots indexed by i; under that contract the result is
// identical for any worker count, which is what makes --workers 1 and
// --workers N byte-compatible.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  const std::size_t chunk = (n + nw - 1) / nw;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nw);
  pool.reserve(nw);
  for (std::size_t w = 0; w < nw; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi, w] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace gvcod

#endif  // GVCOD_PARALLEL_HPP_
