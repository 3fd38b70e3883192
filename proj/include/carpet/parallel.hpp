// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace carpet {

/// Worker cap. Reads CARPET_SLICER_THREADS once; set_worker_count() overrides.
inline std::atomic<unsigned>& worker_count_slot() {
    static std::atomic<unsigned> slot = [] {
        unsigned n = std::max(1u, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("CARPET_SLICER_THREADS")) {
            try {
                long v = std::stol(env);
                if (v >= 1) n = static_cast<unsigned>(v);
            } catch (...) {
            }
        }
        return n;
    }();
    return slot;
}

inline unsigned worker_count() { return worker_count_slot().load(); }
inline void set_worker_count(unsigned n) { worker_count_slot().store(std::max(1u, n)); }

/// Runs fn(i) for i in [0, count) on up to worker_count() threads. Callers
/// write into per-index slots, so results never depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(worker_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            try {
                for (std::size_t i = next++; i < count; i = next++) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next = count;
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace carpet
