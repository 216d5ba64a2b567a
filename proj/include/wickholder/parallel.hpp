#pragma once

// Deterministic parallel helpers. Work is split into fixed-size chunks whose
// boundaries do not depend on the worker count, and partial results are
// reduced in index order, so outputs are bit-identical for any number of
// workers (including 1).

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

#include "wickholder/errors.hpp"

namespace wickholder {

inline int default_jobs() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Calls fn(chunk_index, begin, end) for every chunk of [0, n) of size
// chunk_size (last chunk may be short). Chunks are claimed by `jobs` workers
// through a shared counter; fn must write only to per-chunk slots.
template <typename Fn>
void parallel_chunks(std::int64_t n, std::int64_t chunk_size, int jobs, Fn&& fn) {
  if (n < 0 || chunk_size <= 0) throw ConfigError("parallel_chunks: bad range");
  if (n == 0) return;
  const std::int64_t num_chunks = (n + chunk_size - 1) / chunk_size;
  if (jobs < 1) jobs = 1;
  if (jobs == 1 || num_chunks == 1) {
    for (std::int64_t c = 0; c < num_chunks; ++c) {
      fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
    }
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::int64_t c = next.fetch_add(1);
      if (c >= num_chunks) return;
      fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
    }
  };
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(std::min<std::int64_t>(jobs, num_chunks));
  pool.reserve(static_cast<std::size_t>(spawn) - 1);
  for (int t = 1; t < spawn; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

// Pairwise sum in index order: the reduction tree depends only on v.size(),
// never on how the entries were produced.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size());
}

}  // namespace wickholder
