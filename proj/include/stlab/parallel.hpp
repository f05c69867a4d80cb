#pragma once

#include <functional>

namespace stlab {

// Worker count used by parallel_for. Defaults to STLAB_THREADS or 1.
int thread_count();
void set_thread_count(int n);

// Runs fn(i) for i in [0, n). Work items must be independent; results do
// not depend on the thread count.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace stlab
