#pragma once

// Static worker pool over an index range. Each index is processed by exactly
// one worker and workers write disjoint outputs, so results are identical for
// any thread count; reductions that need a fixed order should be done by the
// caller after the parallel section.

#include <cstddef>
#include <thread>
#include <vector>

namespace tdlsm {

template <typename F>
void parallel_for(std::size_t n, int threads, F&& body) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (std::size_t w = 0; w < nw; ++w) {
        pool.emplace_back([&, w] {
            // Contiguous slices: worker w gets [lo, hi).
            const std::size_t base = n / nw, rem = n % nw;
            const std::size_t lo = w * base + std::min(w, rem);
            const std::size_t hi = lo + base + (w < rem ? 1 : 0);
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace tdlsm
