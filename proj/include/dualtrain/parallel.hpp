// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dualtrain {

/// Number of workers to use when the caller asks for `requested` (0 = all cores).
inline unsigned resolve_threads(unsigned requested) noexcept
{
    if (requested != 0) {
        return requested;
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Results land at
/// their own index, so the output never depends on scheduling. The first
/// exception thrown by any call is rethrown after all workers join.
template <typename Fn>
auto parallel_map(std::size_t n, unsigned threads, Fn&& fn)
    -> std::vector<decltype(fn(std::size_t{}))>
{
    using Result = decltype(fn(std::size_t{}));
    std::vector<Result> out(n);
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = fn(i);
        }
        return out;
    }

    std::atomic<std::size_t> cursor{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                cursor.store(n);
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back(work);
    }
    pool.clear();
    if (error) {
        std::rethrow_exception(error);
    }
    return out;
}

}  // namespace dualtrain
