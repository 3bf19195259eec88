#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace twotone {

// Runs f(i) for i in [0, n) on a small thread pool. Work items must be
// independent; the first exception is rethrown on the calling thread.
template <class F>
void parallel_for(std::size_t n, F&& f, unsigned max_threads = 0) {
    if (n == 0) return;
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (max_threads > 0) hw = std::min(hw, max_threads);
    const unsigned workers = unsigned(std::min<std::size_t>(hw, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(body);
    for (auto& th : threads) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace twotone
