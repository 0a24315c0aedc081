#pragma once

#include <cstdint>
#include <functional>

namespace lowrr {

/// SplitMix64-style mixing of a master seed and a stream index. Replicate b
/// of any resampling loop draws from its own engine seeded with
/// derive_seed(seed, b), so results do not depend on thread scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Runs fn(0..num_tasks-1) across up to `threads` worker threads
/// (0 = hardware concurrency). Tasks must only write to their own slots.
/// The first exception thrown by any task is rethrown after all join.
void parallel_for(int num_tasks, int threads, const std::function<void(int)>& fn);

int resolve_threads(int threads);

}  // namespace lowrr
