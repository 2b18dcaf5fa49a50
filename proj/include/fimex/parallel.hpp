#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fimex {

/// Worker count requested through FIMEX_THREADS, else hardware concurrency.
/// Always at least 1.
int default_thread_count();

/// Fixed-size fork-join pool. `run(count, fn)` calls fn(i) for i in
/// [0, count) and returns once all calls finished; the first exception thrown
/// by any call is rethrown on the calling thread. Not reentrant.
class ForkJoinPool {
public:
    explicit ForkJoinPool(int threads);
    ~ForkJoinPool();

    ForkJoinPool(const ForkJoinPool&) = delete;
    ForkJoinPool& operator=(const ForkJoinPool&) = delete;

    int size() const { return static_cast<int>(workers_.size()) + 1; }

    void run(std::size_t count, const std::function<void(std::size_t)>& fn);

private:
    void worker_loop();
    void drain(std::unique_lock<std::mutex>& lock);

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(std::size_t)>* task_ = nullptr;
    std::size_t count_ = 0;
    std::size_t next_ = 0;
    std::size_t finished_ = 0;
    std::size_t generation_ = 0;
    bool stopping_ = false;
    std::exception_ptr error_;
};

}  // namespace fimex
