#include "thermal/parallel.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace thermal {

std::pair<std::size_t, std::size_t> shard_range(std::size_t n, std::size_t shards, std::size_t s) {
  const std::size_t base = n / shards;
  const std::size_t extra = n % shards;
  const std::size_t begin = s * base + std::min(s, extra);
  const std::size_t end = begin + base + (s < extra ? 1 : 0);
  return {begin, end};
}

void parallel_shards(std::size_t n, std::size_t shards,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  shards = std::max<std::size_t>(1, std::min(shards, std::max<std::size_t>(n, 1)));
  const std::size_t workers =
      std::min<std::size_t>(shards, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t s = 0; s < shards; ++s) {
      const auto [b, e] = shard_range(n, shards, s);
      body(s, b, e);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(shards);
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t s = w; s < shards; s += workers) {
        try {
          const auto [b, e] = shard_range(n, shards, s);
          body(s, b, e);
        } catch (...) {
          errors[s] = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace thermal
