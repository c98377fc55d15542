#pragma once

// Deterministic replica parallelism: work is split into fixed chunks indexed
// by chunk id, threads pull chunks from an atomic counter, and the caller
// reduces per-chunk results in chunk order. Numeric output is independent of
// the thread count and of scheduling.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace circlechaos::detail {

template <class Fn>
void parallel_for_chunks(std::int64_t total, std::int64_t chunk_size, Fn&& fn) {
    if (total <= 0) return;
    const std::int64_t n_chunks = (total + chunk_size - 1) / chunk_size;
    unsigned hw = std::thread::hardware_concurrency();
    unsigned n_threads = std::max(1u, std::min<unsigned>(hw ? hw : 1, static_cast<unsigned>(n_chunks)));

    if (n_threads == 1) {
        for (std::int64_t c = 0; c < n_chunks; ++c)
            fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
        return;
    }

    std::atomic<std::int64_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::int64_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i + 1 < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

}  // namespace circlechaos::detail
