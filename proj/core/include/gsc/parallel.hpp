#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace gsc {

/// Row-chunk size for streamed per-sample reductions and kernel blocks.
inline constexpr Eigen::Index kRowChunk = 4096;

/// Worker count from GSC_THREADS (default 1). Read once per process.
inline int thread_count() {
  static const int n = [] {
    const char* env = std::getenv("GSC_THREADS");
    if (env == nullptr) return 1;
    const int v = std::atoi(env);
    return v < 1 ? 1 : v;
  }();
  return n;
}

/// Runs fn(chunk_index, begin, end) over fixed-size row chunks. Chunks may
/// execute concurrently; callers own one partial per chunk and must combine
/// them in chunk order so results do not depend on the thread count.
template <class Fn>
void for_each_chunk(Eigen::Index n, Fn&& fn) {
  const Eigen::Index nchunks = n == 0 ? 0 : (n + kRowChunk - 1) / kRowChunk;
  const int workers = thread_count();
  if (workers <= 1 || nchunks <= 1) {
    for (Eigen::Index c = 0; c < nchunks; ++c) {
      fn(c, c * kRowChunk, std::min(n, (c + 1) * kRowChunk));
    }
    return;
  }
  std::atomic<Eigen::Index> next{0};
  auto worker = [&] {
    for (;;) {
      const Eigen::Index c = next.fetch_add(1);
      if (c >= nchunks) return;
      fn(c, c * kRowChunk, std::min(n, (c + 1) * kRowChunk));
    }
  };
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(std::min<Eigen::Index>(workers, nchunks));
  pool.reserve(static_cast<std::size_t>(spawn));
  for (int i = 0; i < spawn; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

/// Deterministic chunked map-reduce: one partial per chunk, combined in
/// chunk index order (fixed reduction order for any GSC_THREADS).
template <class Partial, class ChunkFn, class CombineFn>
Partial chunked_reduce(Eigen::Index n, Partial init, ChunkFn&& fn, CombineFn&& combine) {
  const Eigen::Index nchunks = n == 0 ? 0 : (n + kRowChunk - 1) / kRowChunk;
  std::vector<Partial> parts(static_cast<std::size_t>(nchunks), init);
  for_each_chunk(n, [&](Eigen::Index c, Eigen::Index b, Eigen::Index e) {
    fn(parts[static_cast<std::size_t>(c)], b, e);
  });
  Partial acc = std::move(init);
  for (auto& p : parts) combine(acc, p);
  return acc;
}

}  // namespace gsc
