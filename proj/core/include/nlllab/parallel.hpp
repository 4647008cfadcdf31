#pragma once

#include <cstddef>
#include <functional>

namespace nlllab {

/// 0 means std::thread::hardware_concurrency() (at least 1).
int resolve_workers(int workers);

/// Calls body(i) for i in [0, n) on up to `workers` threads using contiguous
/// static chunks. The body must write only to cells owned by index i, so the
/// result does not depend on the worker count. The first exception thrown by
/// any chunk is rethrown after all threads join.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

}  // namespace nlllab
