#pragma once

#include <cstddef>
#include <functional>

namespace nimf {

// Runs body(i) for i in [0, count) on up to `workers` threads. Exceptions from
// any worker are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

int hardware_workers();

}  // namespace nimf
