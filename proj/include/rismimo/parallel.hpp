#pragma once

#include <cstddef>
#include <functional>

namespace rismimo {

/// Number of worker threads used by parallel loops. 0 selects hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, n), split into contiguous chunks across worker threads.
/// Each index is processed exactly once; bodies must only write to index-owned state.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace rismimo
