#pragma once

#include <cstddef>
#include <functional>

namespace ddrlab {

/// Worker count: DDF_THREADS if set and positive, otherwise hardware
/// concurrency (0 or unset means auto).
int thread_count();

/// Runs body(i) for i in [0, n). Each index is processed exactly once; the
/// assignment of indices to threads does not affect results as long as body
/// only writes to slots owned by i. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ddrlab
