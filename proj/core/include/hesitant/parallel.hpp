#pragma once

#include <cstddef>
#include <functional>

namespace hesitant {

/// Worker cap: HESITANT_THREADS if set to a positive integer, else the core count.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
/// executed exactly once; the first exception thrown is rethrown after join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace hesitant
