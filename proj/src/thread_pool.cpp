#include "forestfill/thread_pool.hpp"

#include <algorithm>
#include <exception>

namespace forestfill {

namespace {
thread_local bool t_in_worker = false;
}

ThreadPool::ThreadPool(std::size_t threads) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads == 1) return;
    workers_.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard lock(mu_);
        stopping_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
}

void ThreadPool::worker_loop() {
    t_in_worker = true;
    for (;;) {
        std::function<void()> job;
        {
            std::unique_lock lock(mu_);
            cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            if (queue_.empty()) return;
            job = std::move(queue_.front());
            queue_.pop_front();
        }
        job();
    }
}

void ThreadPool::parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    std::vector<std::exception_ptr> errors(n);
    if (workers_.empty() || t_in_worker || n == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::mutex done_mu;
        std::condition_variable done_cv;
        std::size_t remaining = n;
        {
            std::lock_guard lock(mu_);
            for (std::size_t i = 0; i < n; ++i) {
                queue_.emplace_back([&, i] {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                    std::lock_guard done_lock(done_mu);
                    if (--remaining == 0) done_cv.notify_all();
                });
            }
        }
        cv_.notify_all();
        std::unique_lock lock(done_mu);
        done_cv.wait(lock, [&] { return remaining == 0; });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace forestfill
