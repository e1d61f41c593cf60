#include "ndsp/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace ndsp {

namespace {
std::atomic<std::size_t> overrideWorkers{0};
}

std::size_t workerCount() {
  if (const std::size_t forced = overrideWorkers.load()) return forced;
  const char* env = std::getenv("NDSP_WORKERS");
  if (!env || !*env) return 1;
  try {
    const long long v = std::stoll(env);
    return static_cast<std::size_t>(std::clamp<long long>(v, 1, 64));
  } catch (const std::exception&) {
    return 1;
  }
}

void setWorkerCount(std::size_t workers) { overrideWorkers.store(std::min<std::size_t>(workers, 64)); }

void parallelFor(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(workerCount(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex failMutex;
  std::size_t failIndex = count;
  std::exception_ptr failure;
  auto run = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failMutex);
        if (i < failIndex) {
          failIndex = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace ndsp
