#include "mmdcc/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

namespace mmdcc {

namespace {
constexpr std::size_t kChunk = 1024;

int detect_threads() {
  if (const char* env = std::getenv("RKHS_CC_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}
}  // namespace

int worker_threads() {
  static const int n = detect_threads();
  return n;
}

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& fn,
                  int threads) {
  if (n == 0) return;
  if (threads <= 0) threads = worker_threads();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  if (threads == 1 || chunks == 1) {
    fn(0, n);
    return;
  }
  const int workers =
      static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), chunks));
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      const std::size_t begin = c * kChunk;
      fn(begin, std::min(begin + kChunk, n));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int i = 1; i < workers; ++i) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
}

double parallel_reduce_sum(
    std::size_t n, const std::function<double(std::size_t, std::size_t)>& fn,
    int threads) {
  if (n == 0) return 0.0;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
  if (threads <= 0) threads = worker_threads();
  if (threads == 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t begin = c * kChunk;
      partial[c] = fn(begin, std::min(begin + kChunk, n));
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto body = [&] {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= chunks) return;
        const std::size_t begin = c * kChunk;
        partial[c] = fn(begin, std::min(begin + kChunk, n));
      }
    };
    const int workers =
        static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), chunks));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    for (int i = 1; i < workers; ++i) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
  }
  double total = 0.0;
  for (const double p : partial) total += p;
  return total;
}

}  // namespace mmdcc
