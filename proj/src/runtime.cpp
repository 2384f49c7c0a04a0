#include "homog/runtime.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace homog::runtime {

namespace {
int g_threads = 0;
}

void set_threads(int k) { g_threads = k < 0 ? 0 : k; }

int threads() {
  if (g_threads > 0) return g_threads;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

void parallel_for(std::int64_t count, const std::function<void(std::int64_t, std::int64_t)>& body) {
  int T = std::min<std::int64_t>(threads(), std::max<std::int64_t>(count, 1));
  if (T <= 1 || count < 2) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(T);
  std::int64_t chunk = (count + T - 1) / T;
  for (int t = 0; t < T; ++t) {
    std::int64_t lo = t * chunk, hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace homog::runtime
