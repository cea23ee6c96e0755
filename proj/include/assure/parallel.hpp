// parallel.hpp
//
// Minimal fork-join helper. Work items write into their own slots, so results
// never depend on the thread count. Nested calls run serially.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace assure {

namespace detail {

inline std::atomic<unsigned>& thread_setting() {
    static std::atomic<unsigned> value{0};
    return value;
}

inline bool& in_parallel_region() {
    thread_local bool flag = false;
    return flag;
}

} // namespace detail

/// Sets the worker count used by parallel_for (0 = ASSURE_THREADS or 1).
inline void set_thread_count(unsigned threads) { detail::thread_setting() = threads; }

inline unsigned thread_count() {
    const unsigned t = detail::thread_setting();
    if (t > 0)
        return t;
    if (const char* env = std::getenv("ASSURE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return static_cast<unsigned>(std::min(v, 256L));
    }
    return 1;
}

/// Calls fn(i) for i in [0, n). Items are handed out dynamically; the first
/// exception (lowest index among those thrown) is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
    if (workers <= 1 || detail::in_parallel_region()) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex mu;
    std::exception_ptr error;
    std::size_t error_index = n;
    auto body = [&] {
        detail::in_parallel_region() = true;
        while (!stop.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n)
                break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
                stop = true;
            }
        }
        detail::in_parallel_region() = false;
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned t = 1; t < workers; ++t)
        pool.emplace_back(body);
    body();
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace assure
