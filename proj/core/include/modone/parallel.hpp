#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace modone {

// Deterministic work splitting: the chunk grid depends only on the problem
// size, never on the thread count, and callers reduce per-chunk partials in
// chunk order. Running with 1 or 16 threads therefore produces identical
// bits.
struct ChunkGrid {
    std::size_t total = 0;
    std::size_t chunk = 1;

    std::size_t count() const { return total == 0 ? 0 : (total + chunk - 1) / chunk; }
    std::size_t begin(std::size_t c) const { return c * chunk; }
    std::size_t end(std::size_t c) const { return std::min(total, (c + 1) * chunk); }
};

// Runs fn(chunk_index) for every chunk on up to `threads` workers (<=1 runs
// inline). fn must write only to per-chunk slots.
template <class Fn>
void run_chunks(const ChunkGrid& grid, int threads, Fn&& fn) {
    const std::size_t n = grid.count();
    if (n == 0) return;
    if (threads <= 1 || n == 1) {
        for (std::size_t c = 0; c < n; ++c) fn(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t c = next.fetch_add(1);
                if (c >= n) return;
                try {
                    fn(c);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    next.store(n);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}
