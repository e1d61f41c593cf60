#pragma once

#include <cstddef>
#include <functional>

namespace ndsp {

/// Worker count from NDSP_WORKERS (default 1; values are clamped to 1..64).
std::size_t workerCount();
/// Overrides the environment for the current process (0 restores it).
void setWorkerCount(std::size_t workers);

/// Runs body(i) for i in [0, count) on up to workerCount() threads. Each
/// index must write only its own result slot. If bodies throw, the exception
/// of the smallest failing index is rethrown after all workers stop.
void parallelFor(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace ndsp
