#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace forestfill {

/// Fixed-size worker pool exposing a blocking parallel_for. Task results
/// must be written to caller-owned, index-addressed slots; the pool makes no
/// ordering promises, so callers restore order by index.
///
/// parallel_for called from inside a pool worker runs inline, which makes
/// nested use (study -> replicate -> imputer) deadlock-free.
class ThreadPool {
public:
    /// threads == 0 uses std::thread::hardware_concurrency().
    /// threads == 1 spawns nothing; everything runs on the caller.
    explicit ThreadPool(std::size_t threads = 1);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    std::size_t size() const noexcept { return workers_.empty() ? 1 : workers_.size(); }

    /// Runs fn(0..n-1); rethrows the first exception (by index) after all
    /// tasks finish.
    void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

private:
    void worker_loop();

    std::vector<std::thread> workers_;
    std::deque<std::function<void()>> queue_;
    std::mutex mu_;
    std::condition_variable cv_;
    bool stopping_ = false;
};

}  // namespace forestfill
