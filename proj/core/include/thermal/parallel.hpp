#pragma once

#include <cstddef>
#include <functional>

namespace thermal {

/// Splits [0, n) into `shards` contiguous blocks and runs body(shard, begin,
/// end) on each, concurrently when more than one hardware thread exists.
/// Blocks are fixed by (n, shards) alone, so results merged in shard order
/// are independent of scheduling.
void parallel_shards(std::size_t n, std::size_t shards,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

/// Block [begin, end) of shard s out of `shards` over n items.
std::pair<std::size_t, std::size_t> shard_range(std::size_t n, std::size_t shards, std::size_t s);

}  // namespace thermal
