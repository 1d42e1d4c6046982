#include "nanozk/workpool.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nanozk {

void run_pool(size_t n_jobs, size_t workers, const std::function<void(size_t)>& fn) {
  if (workers == 0) workers = 1;
  if (workers == 1 || n_jobs <= 1) {
    for (size_t i = 0; i < n_jobs; i++) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= n_jobs) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  size_t count = std::min(workers, n_jobs);
  threads.reserve(count);
  for (size_t i = 0; i < count; i++) threads.emplace_back(body);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace nanozk
