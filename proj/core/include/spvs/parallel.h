#pragma once

#include <cstddef>
#include <functional>

namespace spvs {

// Worker count from SPVS_THREADS, else hardware concurrency (at least 1).
std::size_t WorkerCount();

// Runs fn(i) for i in [0, n). Callers write results into per-index slots and
// reduce them in index order afterwards, so results do not depend on the
// worker count. Rethrows the exception of the lowest failing index.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace spvs
