#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace splitree {

// Process-wide worker count used by replica loops; 0 means hardware default.
void set_worker_threads(int n);
int worker_threads();

// Runs fn(i) for i in [0, count) on the configured worker pool. Each index is
// an independent unit writing only to its own slot, so results do not depend
// on the thread count. Exceptions are rethrown on the caller thread.
inline void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn) {
    const int workers = worker_threads();
    if (count <= 0) return;
    if (workers <= 1 || count == 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::vector<std::thread> pool;
    const int n = static_cast<int>(std::min<std::int64_t>(workers, count));
    pool.reserve(n);
    for (int t = 0; t < n; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= count || failed.load(std::memory_order_relaxed)) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failed && error) std::rethrow_exception(error);
}

}  // namespace splitree
