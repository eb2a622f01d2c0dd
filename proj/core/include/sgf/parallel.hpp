#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace sgf {

// Number of worker threads, taken from SGF_THREADS (falls back to the hardware
// count, clamped to 16). Always >= 1.
int thread_count();

// Runs fn(begin, end) over [0, n) split into fixed-size chunks. Chunk
// boundaries do not depend on the thread count, so per-chunk reductions can be
// combined in index order to give results that are independent of scheduling.
void parallel_for_chunks(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn);

// Deterministic parallel sum: evaluates term(i) for i in [0, n), accumulating
// per fixed chunk, then adds the chunk sums in index order.
double parallel_sum(std::int64_t n, const std::function<double(std::int64_t)>& term);

}  // namespace sgf
