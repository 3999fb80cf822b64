#pragma once

#include <cstddef>
#include <functional>

namespace bruf::harness {

/// Thread count: explicit request if nonzero, else BRUF_THREADS, else 1.
std::size_t resolve_threads(std::size_t requested);

/// Calls body(i) for i in [0, count) on up to `threads` workers. Each index
/// writes only its own result slot, so output does not depend on scheduling.
/// The first exception thrown by any body is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace bruf::harness
