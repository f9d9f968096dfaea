#pragma once

#include <functional>

namespace entangle {

// Worker cap for parallel loops; 0 means "hardware concurrency".  Results of
// all parallel loops in the toolkit are independent of this setting: work is
// addressed by index and reduced in index order.
int max_threads();
void set_max_threads(int n);

// Run body(i) for i in [0, n) on up to max_threads() workers.  body must only
// write to slots owned by its index.  Exceptions are rethrown (lowest worker
// first) after all workers join.
void parallel_for(long n, const std::function<void(long)>& body);

}  // namespace entangle
