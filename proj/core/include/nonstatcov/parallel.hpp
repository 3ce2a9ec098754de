#pragma once

#include <cstddef>
#include <functional>

namespace nonstatcov {

/// Number of worker threads used by `parallel_for`. Defaults to the
/// NONSTATCOV_THREADS environment variable, else 1.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n). Iterations must write to disjoint outputs;
/// results never depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace nonstatcov
