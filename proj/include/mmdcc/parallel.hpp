#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace mmdcc {

// Worker cap from RKHS_CC_THREADS (default: logical cores), read once.
int worker_threads();

// Runs fn(begin, end) over fixed 1024-element chunks. Chunk boundaries depend
// only on n, never on the thread count, so per-chunk results combined in
// chunk order are reproducible under any parallelism level.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& fn,
                  int threads = 0);

// Chunk-ordered sum of fn(begin, end) partials.
double parallel_reduce_sum(
    std::size_t n,
    const std::function<double(std::size_t, std::size_t)>& fn,
    int threads = 0);

}  // namespace mmdcc
