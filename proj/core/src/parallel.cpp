#include "mgp/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace mgp {

int worker_threads() {
  static const int cached = [] {
    if (const char* env = std::getenv("MGP_THREADS")) {
      int n = std::atoi(env);
      if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }();
  return cached;
}

void parallel_for_chunks(std::int64_t count,
                         const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (count <= 0) return;
  int workers = std::min<std::int64_t>(worker_threads(), count);
  if (workers <= 1) {
    fn(0, count);
    return;
  }
  std::int64_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers) - 1);
  for (int w = 1; w < workers; ++w) {
    std::int64_t begin = w * chunk;
    std::int64_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  fn(0, std::min(count, chunk));
  for (auto& t : threads) t.join();
}

void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn) {
  parallel_for_chunks(count, [&fn](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace mgp
