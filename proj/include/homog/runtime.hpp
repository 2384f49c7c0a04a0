#pragma once

#include <cstdint>
#include <functional>

namespace homog::runtime {

// Worker-thread count used by parallel_for. 0 = hardware concurrency.
void set_threads(int k);
int threads();

// Static split of [0,count) over the configured threads. Chunks are disjoint,
// so bodies may write to per-index slots without synchronization; any
// reductions must stay serial to keep results independent of the thread count.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t, std::int64_t)>& body);

}  // namespace homog::runtime
