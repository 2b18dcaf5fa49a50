#include "fimex/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <utility>

namespace fimex {

int default_thread_count()
{
    if (const char* env = std::getenv("FIMEX_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
            // fall through to the hardware default
        }
    }
    return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

ForkJoinPool::ForkJoinPool(int threads)
{
    const int extra = std::max(0, threads - 1);
    workers_.reserve(static_cast<std::size_t>(extra));
    for (int i = 0; i < extra; ++i) workers_.emplace_back([this] { worker_loop(); });
}

ForkJoinPool::~ForkJoinPool()
{
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    wake_.notify_all();
    for (auto& w : workers_) w.join();
}

void ForkJoinPool::drain(std::unique_lock<std::mutex>& lock)
{
    while (next_ < count_) {
        const std::size_t i = next_++;
        const auto* task = task_;
        lock.unlock();
        std::exception_ptr failure;
        try {
            (*task)(i);
        } catch (...) {
            failure = std::current_exception();
        }
        lock.lock();
        if (failure && !error_) error_ = failure;
        if (++finished_ == count_) done_.notify_all();
    }
}

void ForkJoinPool::worker_loop()
{
    std::size_t seen = 0;
    std::unique_lock lock(mutex_);
    for (;;) {
        wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
        if (stopping_) return;
        seen = generation_;
        drain(lock);
    }
}

void ForkJoinPool::run(std::size_t count, const std::function<void(std::size_t)>& fn)
{
    if (count == 0) return;
    if (workers_.empty() || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::unique_lock lock(mutex_);
    task_ = &fn;
    count_ = count;
    next_ = 0;
    finished_ = 0;
    error_ = nullptr;
    ++generation_;
    wake_.notify_all();
    drain(lock);
    done_.wait(lock, [&] { return finished_ == count_; });
    task_ = nullptr;
    auto err = std::exchange(error_, nullptr);
    lock.unlock();
    if (err) std::rethrow_exception(err);
}

}  // namespace fimex
