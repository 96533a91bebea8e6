#include "geomatch/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace geomatch {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int n) { g_max_threads = std::max(0, n); }

int max_threads() {
  const int n = g_max_threads.load();
  if (n > 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

void configure_threads_from_env() {
  if (const char* env = std::getenv("GEOMATCH_THREADS")) {
    try {
      set_max_threads(std::stoi(env));
    } catch (const std::exception&) {
      set_max_threads(0);
    }
  }
}

void parallel_for(int n, const std::function<void(int)>& body, int min_per_thread) {
  const int workers = std::min(max_threads(), std::max(1, n / std::max(1, min_per_thread)));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const int chunk = (n + workers - 1) / workers;
  for (int w = 1; w < workers; ++w) {
    const int begin = w * chunk, end = std::min(n, begin + chunk);
    pool.emplace_back([&body, begin, end] {
      for (int i = begin; i < end; ++i) body(i);
    });
  }
  for (int i = 0; i < std::min(n, chunk); ++i) body(i);
  for (auto& t : pool) t.join();
}

}  // namespace geomatch
