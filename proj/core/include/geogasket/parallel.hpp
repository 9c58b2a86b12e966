#pragma once

// Minimal fork-join helper. The worker count comes from set_thread_count(),
// else the GEOGASKET_THREADS environment variable, else the hardware.

#include <cstddef>
#include <functional>

namespace geogasket {

/// 0 restores the default (environment or hardware).
void set_thread_count(int n);
int thread_count();

/// Runs fn(0..n-1) across the worker pool. Indices are split into contiguous
/// blocks, so per-index results written to a pre-sized vector are deterministic.
/// If any call throws, the exception from the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace geogasket
