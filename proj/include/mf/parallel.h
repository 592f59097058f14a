#pragma once

#include <cstddef>
#include <functional>

namespace mf {

/// Worker cap: the MF_THREADS environment variable if set and positive,
/// otherwise std::thread::hardware_concurrency().
unsigned worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index
/// runs exactly once; results must be written to per-index slots by the
/// caller. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body);

} // namespace mf
