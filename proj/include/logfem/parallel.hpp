#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace logfem {

/// Default worker count: hardware concurrency, at least 1.
inline int default_threads() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

/// Run fn(i) for i in [0, count) on up to `threads` workers with a static
/// interleaved schedule. Each index must write only its own output slot, which
/// keeps results independent of the thread count. The first exception thrown
/// by any task is rethrown on the calling thread.
template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
    threads = std::clamp(threads, 1, std::max(1, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < count; i += threads) fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    pool.clear();
    if (error) std::rethrow_exception(error);
}

}  // namespace logfem
