#include "bilip/common.hpp"

#include <algorithm>
#include <cstdlib>

namespace bilip {

int thread_count() {
  if (const char* env = std::getenv("BILIP_THREADS")) {
    const int k = std::atoi(env);
    if (k >= 1) return k;
  }
  return 1;
}

double parallel_max(long count, const std::function<double(long)>& fn) {
  const int workers = std::min<long>(thread_count(), std::max<long>(count, 1));
  if (workers <= 1) {
    double best = -std::numeric_limits<double>::infinity();
    for (long i = 0; i < count; ++i) best = std::max(best, fn(i));
    return best;
  }
  std::vector<double> partial(workers, -std::numeric_limits<double>::infinity());
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      double best = -std::numeric_limits<double>::infinity();
      for (long i = w; i < count; i += workers) best = std::max(best, fn(i));
      partial[w] = best;
    });
  }
  for (auto& t : pool) t.join();
  return *std::max_element(partial.begin(), partial.end());
}

}  // namespace bilip
