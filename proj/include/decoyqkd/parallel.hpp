#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace decoyqkd {

// Splits [0, n) into one contiguous block per worker and runs
// fn(block_begin, block_end) on each. Callers must write results into
// disjoint, index-addressed slots so the outcome is independent of the
// thread count. threads == 0 means "use the hardware concurrency".
inline void parallel_for(std::uint64_t n, unsigned threads,
                         const std::function<void(std::uint64_t, std::uint64_t)>& fn) {
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(
        std::min<std::uint64_t>(threads, std::max<std::uint64_t>(n, 1)));
    if (threads <= 1) {
        fn(0, n);
        return;
    }

    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    pool.reserve(threads);
    const std::uint64_t chunk = n / threads;
    const std::uint64_t rem = n % threads;
    std::uint64_t begin = 0;
    for (unsigned w = 0; w < threads; ++w) {
        const std::uint64_t end = begin + chunk + (w < rem ? 1 : 0);
        pool.emplace_back([&, w, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& t : pool) {
        t.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace decoyqkd
