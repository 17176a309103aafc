#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "swr/core.hpp"

namespace swr {

// Fixed pool running index-parallel loops.  Each index is processed by
// exactly one thread and writes only its own slot, so results do not depend
// on the number of workers.
class WorkerPool {
public:
    explicit WorkerPool(int workers = 1) : workers_(std::max(1, workers)), busy_(workers_, 0.0) {
        for (int w = 1; w < workers_; ++w) threads_.emplace_back([this, w] { loop(w); });
    }
    ~WorkerPool() {
        {
            std::lock_guard lk(mu_);
            stop_ = true;
            ++generation_;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }
    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    int workers() const { return workers_; }

    // Seconds spent inside tasks, per worker slot (slot 0 is the calling thread).
    const std::vector<double>& busy_seconds() const { return busy_; }

    // Exceptions are rethrown in the caller with the failing index attached.
    void parallel_for(int n, const std::function<void(int)>& fn) {
        if (n <= 0) return;
        if (workers_ == 1 || n == 1) {
            for (int i = 0; i < n; ++i) invoke(fn, i, 0);
            rethrow();
            return;
        }
        {
            std::lock_guard lk(mu_);
            task_ = &fn;
            n_ = n;
            next_.store(0);
            active_ = static_cast<int>(threads_.size());
            ++generation_;
        }
        cv_.notify_all();
        drain(0);
        std::unique_lock lk(mu_);
        done_cv_.wait(lk, [this] { return active_ == 0; });
        task_ = nullptr;
        lk.unlock();
        rethrow();
    }

private:
    void invoke(const std::function<void(int)>& fn, int i, int slot) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            fn(i);
        } catch (const std::exception& e) {
            std::lock_guard lk(err_mu_);
            if (!error_) error_ = std::make_exception_ptr(Error("subdomain " + std::to_string(i + 1) + ": " + e.what()));
        }
        busy_[slot] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    void rethrow() {
        std::exception_ptr e;
        {
            std::lock_guard lk(err_mu_);
            std::swap(e, error_);
        }
        if (e) std::rethrow_exception(e);
    }
    void drain(int slot) {
        for (;;) {
            const int i = next_.fetch_add(1);
            if (i >= n_) break;
            invoke(*task_, i, slot);
        }
    }
    void loop(int slot) {
        unsigned long seen = 0;
        for (;;) {
            {
                std::unique_lock lk(mu_);
                cv_.wait(lk, [&] { return generation_ != seen; });
                seen = generation_;
                if (stop_) return;
            }
            drain(slot);
            {
                std::lock_guard lk(mu_);
                if (--active_ == 0) done_cv_.notify_all();
            }
        }
    }

    int workers_;
    std::vector<double> busy_;
    std::vector<std::thread> threads_;
    std::mutex mu_, err_mu_;
    std::condition_variable cv_, done_cv_;
    const std::function<void(int)>* task_ = nullptr;
    int n_ = 0;
    std::atomic<int> next_{0};
    int active_ = 0;
    unsigned long generation_ = 0;
    bool stop_ = false;
    std::exception_ptr error_;
};

}  // namespace swr
