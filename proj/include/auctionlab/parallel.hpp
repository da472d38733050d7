#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace auctionlab {

// Worker count: AUCTION_LAB_THREADS if set (minimum 1), otherwise the
// hardware concurrency.
inline std::size_t default_thread_count() {
    if (const char* env = std::getenv("AUCTION_LAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<std::size_t>(v);
        return 1;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Evaluates f(i) for every i in [0, n).  Work is handed out through a
// shared counter; f must write its result to caller-owned storage indexed
// by i, so the schedule never affects the outcome.
template <class F>
void parallel_for(std::size_t n, F&& f,
                  std::size_t threads = default_thread_count()) {
    if (n == 0) return;
    if (threads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    threads = std::min(threads, n);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                f(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace auctionlab
