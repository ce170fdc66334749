#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace pcl {

// Deterministic chunked parallel-for. Chunk boundaries depend only on
// [lo, hi) and chunk_len, never on the worker count, and the caller's
// reducer sees chunks in index order; results are bit-identical for any
// jobs value.
//
// body(chunk_index, chunk_lo, chunk_hi) must write only to its own slot.
inline void for_each_chunk(std::int64_t lo, std::int64_t hi, std::int64_t chunk_len, int jobs,
                           const std::function<void(std::size_t, std::int64_t, std::int64_t)>& body) {
  if (hi <= lo) return;
  if (chunk_len < 1) chunk_len = 1;
  std::size_t n_chunks = static_cast<std::size_t>((hi - lo + chunk_len - 1) / chunk_len);
  auto run = [&](std::size_t ci) {
    std::int64_t a = lo + static_cast<std::int64_t>(ci) * chunk_len;
    std::int64_t b = a + chunk_len < hi ? a + chunk_len : hi;
    body(ci, a, b);
  };
  if (jobs <= 1 || n_chunks <= 1) {
    for (std::size_t ci = 0; ci < n_chunks; ++ci) run(ci);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n_chunks);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t ci = next.fetch_add(1); ci < n_chunks; ci = next.fetch_add(1)) run(ci);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace pcl
