#pragma once

#include <cstddef>
#include <functional>

namespace mmf {

/// Number of worker threads used by data-parallel loops (default 1).
void set_thread_count(int n);
int thread_count() noexcept;

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunks write to
/// disjoint outputs; no reduction happens across chunks, so results do not
/// depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace mmf
