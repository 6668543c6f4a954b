#include "airbench/thread_pool.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>

#include "airbench/errors.hpp"

namespace airbench {

// Persistent workers parked on a condition variable; each run_slots call
// publishes a job and the workers race over an atomic slot counter.
struct ThreadPool::Impl {
    std::mutex submit_mu;  // serializes concurrent run_slots callers
    std::mutex mu;
    std::condition_variable cv_work;
    std::condition_variable cv_done;
    std::vector<std::thread> workers;

    const std::function<void(int64_t)>* job = nullptr;
    std::atomic<int64_t> next_slot{0};
    int64_t total_slots = 0;
    int64_t done_slots = 0;
    uint64_t generation = 0;
    bool stop = false;

    void worker_loop() {
        uint64_t seen = 0;
        for (;;) {
            const std::function<void(int64_t)>* fn;
            {
                std::unique_lock<std::mutex> lock(mu);
                cv_work.wait(lock, [&] { return stop || generation != seen; });
                if (stop) return;
                seen = generation;
                fn = job;
            }
            int64_t finished = 0;
            for (;;) {
                int64_t slot = next_slot.fetch_add(1, std::memory_order_relaxed);
                if (slot >= total_slots) break;
                (*fn)(slot);
                ++finished;
            }
            {
                std::unique_lock<std::mutex> lock(mu);
                done_slots += finished;
                if (done_slots == total_slots) cv_done.notify_all();
            }
        }
    }
};

ThreadPool::ThreadPool(int threads) : impl_(new Impl) {
    if (threads <= 0) {
        unsigned hw = std::thread::hardware_concurrency();
        threads = hw ? static_cast<int>(hw) : 1;
    }
    threads_ = threads;
    for (int i = 1; i < threads; ++i)
        impl_->workers.emplace_back([this] { impl_->worker_loop(); });
}

ThreadPool::~ThreadPool() {
    {
        std::unique_lock<std::mutex> lock(impl_->mu);
        impl_->stop = true;
    }
    impl_->cv_work.notify_all();
    for (auto& w : impl_->workers) w.join();
    delete impl_;
}

void ThreadPool::run_slots(int64_t slots, const std::function<void(int64_t)>& fn) {
    if (slots <= 0) return;
    if (threads_ == 1 || slots == 1) {
        for (int64_t s = 0; s < slots; ++s) fn(s);
        return;
    }
    std::lock_guard<std::mutex> submit_lock(impl_->submit_mu);
    {
        std::unique_lock<std::mutex> lock(impl_->mu);
        impl_->job = &fn;
        impl_->total_slots = slots;
        impl_->done_slots = 0;
        impl_->next_slot.store(0, std::memory_order_relaxed);
        ++impl_->generation;
    }
    impl_->cv_work.notify_all();

    // The calling thread participates too.
    int64_t finished = 0;
    for (;;) {
        int64_t slot = impl_->next_slot.fetch_add(1, std::memory_order_relaxed);
        if (slot >= slots) break;
        fn(slot);
        ++finished;
    }
    std::unique_lock<std::mutex> lock(impl_->mu);
    impl_->done_slots += finished;
    impl_->cv_done.wait(lock, [&] { return impl_->done_slots == impl_->total_slots; });
}

void ThreadPool::parallel_ranges(int64_t n, int64_t slots,
                                 const std::function<void(int64_t, int64_t, int64_t)>& fn) {
    if (n <= 0) return;
    if (slots > n) slots = n;
    if (slots <= 0) slots = 1;
    int64_t chunk = (n + slots - 1) / slots;
    run_slots(slots, [&](int64_t s) {
        int64_t begin = s * chunk;
        int64_t end = std::min(n, begin + chunk);
        if (begin < end) fn(begin, end, s);
    });
}

namespace {
int g_global_threads = 0;
bool g_global_made = false;
} // namespace

ThreadPool& ThreadPool::global() {
    static ThreadPool pool(g_global_threads);
    g_global_made = true;
    return pool;
}

void ThreadPool::set_global_threads(int threads) {
    if (g_global_made)
        throw StateError("thread pool already started; set --jobs before first use");
    g_global_threads = threads;
}

} // namespace airbench
