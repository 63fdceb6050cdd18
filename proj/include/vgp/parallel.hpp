#pragma once

#include <cstddef>
#include <functional>

namespace vgp {

/// Worker count used by parallel_for. Initialized from the TOOL_THREADS
/// environment variable (hardware concurrency when unset).
std::size_t worker_count();
void set_worker_count(std::size_t n);

/// Runs fn(i) for i in [0, n). Work is handed out in fixed-size chunks that do
/// not depend on the worker count, and every fn(i) must write only to slot i
/// of its output, so results are bitwise identical for any TOOL_THREADS.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Chunked variant: fn(begin, end) over disjoint ranges with a fixed chunk
/// size; the range decomposition is independent of the worker count.
void parallel_for_chunks(std::size_t n, std::size_t chunk,
                         const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace vgp
