#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace aggrolab {

// Runs f(i) for i in [0, count) on `workers` threads with static contiguous
// chunks. Results must be written to per-index slots so that the output does
// not depend on the worker count. The first exception thrown is rethrown.
template <class F>
void parallel_for(std::size_t count, unsigned workers, F&& f) {
    workers = std::max(1u, workers);
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    const std::size_t nthreads = std::min<std::size_t>(workers, count);
    std::exception_ptr first;
    std::mutex guard;
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t w = 0; w < nthreads; ++w) {
        const std::size_t lo = count * w / nthreads;
        const std::size_t hi = count * (w + 1) / nthreads;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) f(i);
            } catch (...) {
                std::lock_guard lock(guard);
                if (!first) first = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

}  // namespace aggrolab
