#include "sgf/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

namespace sgf {

namespace {
constexpr std::int64_t kChunk = 8192;

int detect_threads() {
  if (const char* env = std::getenv("SGF_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return std::min(v, 64);
  }
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  return static_cast<int>(std::min(hw, 16u));
}
}  // namespace

int thread_count() {
  static const int n = detect_threads();
  return n;
}

void parallel_for_chunks(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (n <= 0) return;
  const std::int64_t nchunks = (n + kChunk - 1) / kChunk;
  const int workers = static_cast<int>(std::min<std::int64_t>(thread_count(), nchunks));
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<std::int64_t> next{0};
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::int64_t c = next.fetch_add(1);
        if (c >= nchunks) return;
        const std::int64_t b = c * kChunk;
        fn(b, std::min(n, b + kChunk));
      }
    });
  }
  for (auto& th : pool) th.join();
}

double parallel_sum(std::int64_t n, const std::function<double(std::int64_t)>& term) {
  if (n <= 0) return 0.0;
  const std::int64_t nchunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(static_cast<std::size_t>(nchunks), 0.0);
  parallel_for_chunks(n, [&](std::int64_t b, std::int64_t e) {
    double acc = 0.0;
    for (std::int64_t i = b; i < e; ++i) acc += term(i);
    partial[static_cast<std::size_t>(b / kChunk)] = acc;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace sgf
