#pragma once

// Deterministic data-parallel helper. Work items are independent and written
// to caller-indexed slots, so results are identical for any worker count.
// EXLAB_THREADS caps the worker pool (default: hardware concurrency).

#include <cstddef>
#include <functional>

namespace exlab {

int worker_count();

void parallel_for(size_t n, const std::function<void(size_t)>& body);

}  // namespace exlab
