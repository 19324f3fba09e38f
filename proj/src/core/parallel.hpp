#pragma once

#include <cstddef>
#include <functional>

namespace vgc {

// Global worker cap for parallel loops. Affects speed only: every parallel_for
// body writes per-index results and all cross-index reductions are performed
// sequentially in index order afterwards, so outputs are identical for any
// thread count.
void set_max_threads(int n);
int max_threads();

// Runs fn(begin, end) over a static partition of [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace vgc
