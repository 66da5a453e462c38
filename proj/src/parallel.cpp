#include "egdeg/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace egdeg {
namespace {

std::atomic<int> g_override{0};

int env_workers() {
  const char* raw = std::getenv("EGDEG_WORKERS");
  if (raw == nullptr) return 1;
  const int n = std::atoi(raw);
  return n >= 1 ? n : 1;
}

}  // namespace

int worker_count() {
  const int o = g_override.load();
  return o > 0 ? o : env_workers();
}

void set_worker_count(int n) { g_override.store(n > 0 ? n : 0); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const int workers = worker_count();
  if (workers <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::size_t failure_index = n;
  std::mutex failure_mutex;
  constexpr std::size_t kChunk = 16;
  auto run = [&] {
    for (;;) {
      const std::size_t start = next.fetch_add(kChunk);
      if (start >= n) return;
      const std::size_t stop = std::min(n, start + kChunk);
      for (std::size_t i = start; i < stop; ++i) {
        try {
          body(i);
        } catch (...) {
          // Keep the lowest failing index so the reported error is stable.
          std::lock_guard lock(failure_mutex);
          if (i < failure_index) {
            failure_index = i;
            failure = std::current_exception();
          }
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace egdeg
