#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace airbench {

// Deterministic fork-join helper. Work is split into a fixed number of slots
// chosen from the problem size alone, so any reduction that accumulates one
// partial value per slot and then combines the slots serially gives
// bit-identical results no matter how many worker threads execute the slots.
class ThreadPool {
public:
    explicit ThreadPool(int threads = 0);  // 0 = hardware_concurrency
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    int threads() const { return threads_; }

    // Runs fn(slot) for slot in [0, slots). Blocks until all slots finish.
    // Slots are claimed dynamically but the caller must not make results
    // depend on claim order.
    void run_slots(int64_t slots, const std::function<void(int64_t)>& fn);

    // Splits [0, n) into `slots` contiguous ranges (slot count independent of
    // thread count) and runs fn(begin, end, slot) for each.
    void parallel_ranges(int64_t n, int64_t slots,
                         const std::function<void(int64_t, int64_t, int64_t)>& fn);

    // Shared pool sized from the --jobs setting; created on first use.
    static ThreadPool& global();
    // Must be called before the first global() call to take effect.
    static void set_global_threads(int threads);

private:
    struct Impl;
    Impl* impl_;
    int threads_;
};

} // namespace airbench
