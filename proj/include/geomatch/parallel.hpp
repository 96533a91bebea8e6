#pragma once

#include <functional>

namespace geomatch {

/// Caps the worker count used by parallel_for; 0 selects hardware concurrency.
void set_max_threads(int n);
int max_threads();

/// Reads GEOMATCH_THREADS (if set) and applies it.
void configure_threads_from_env();

/// Runs body(i) for i in [0, n), split in contiguous chunks over worker threads.
/// Each index must write only to its own output slot; callers reduce serially
/// afterwards, which keeps results independent of the thread count.
void parallel_for(int n, const std::function<void(int)>& body, int min_per_thread = 64);

}  // namespace geomatch
