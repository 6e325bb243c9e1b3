#include "bsq/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bsq::parallel {

namespace {
std::atomic<int> g_max{0};
}

void set_max_threads(int n) { g_max = std::max(0, n); }

int max_threads() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  int cap = g_max.load();
  if (hw < 1) hw = 1;
  return cap > 0 ? std::min(cap, hw) : hw;
}

void parallel_for(int n, const std::function<void(int)>& f) {
  int nt = std::min(max_threads(), n);
  if (nt <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex m;
  auto work = [&] {
    for (int i; (i = next.fetch_add(1)) < n;) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(m);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace bsq::parallel
