#pragma once

#include <cstddef>
#include <functional>

namespace rkhm {

/// Worker cap from RKHM_THREADS (default 1, i.e. sequential).
unsigned worker_threads();

/// Runs body(i) for i in [0, count) across worker_threads() threads using a
/// static contiguous partition. Each index must write to disjoint state.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace rkhm
