#pragma once

#include <cstddef>
#include <functional>

namespace avfc {

// Worker cap from AVFC_THREADS, else the machine's hardware concurrency.
unsigned worker_count();

// Runs body(i) for i in [0, n) on up to `workers` threads. Work is handed
// out by index, so results written to slot i do not depend on scheduling.
// The first exception thrown by any body is rethrown on the caller.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body);

}  // namespace avfc
