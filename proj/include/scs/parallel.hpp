#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace scs {

namespace detail {
inline std::atomic<unsigned>& thread_count_slot() {
    static std::atomic<unsigned> count{1};
    return count;
}
} // namespace detail

inline void set_thread_count(unsigned n) { detail::thread_count_slot() = n == 0 ? 1u : n; }
inline unsigned thread_count() { return detail::thread_count_slot().load(); }

// Runs fn(i) for i in [0, n). Work item i must write only to its own output
// slots; partitioning is by contiguous ranges, so results do not depend on
// the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned threads = std::min<std::size_t>(thread_count(), n == 0 ? 1 : n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn, &first_error, &error_mutex] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace scs
