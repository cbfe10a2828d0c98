#pragma once

#include <cstddef>
#include <functional>

namespace cvinfer {

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work items are
/// handed out by index, so any body that writes only to slot i produces the
/// same result for every worker count. The exception thrown by the lowest
/// failing index is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace cvinfer
