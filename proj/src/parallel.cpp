#include "entangle/parallel.hpp"

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#include "entangle/errors.hpp"

namespace entangle {

namespace {

std::atomic<int> g_max_threads{0};

int resolved_cap() {
  const int cap = g_max_threads.load();
  if (cap > 0) return cap;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

int max_threads() { return resolved_cap(); }

void set_max_threads(int n) {
  if (n < 0) throw ArgumentError("thread cap must be nonnegative");
  g_max_threads.store(n);
}

void parallel_for(long n, const std::function<void(long)>& body) {
  if (n <= 0) return;
  const long workers =
      std::min<long>(resolved_cap(), n);
  if (workers <= 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (long w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        // Contiguous block per worker; indices stay ordered within a block.
        const long lo = n * w / workers;
        const long hi = n * (w + 1) / workers;
        for (long i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace entangle
