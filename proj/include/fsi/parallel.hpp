#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace fsi {

// Deterministic parallel sum over [0, count): chunk results are combined in
// index order, so exact arithmetic yields identical totals for any thread
// count. chunk_fn(begin, end) returns the partial sum of that range.
template <typename T, typename Fn>
T parallel_sum(size_t count, int threads, T zero, Fn&& chunk_fn) {
    if (threads <= 1 || count <= 1) return chunk_fn(size_t{0}, count);
    const size_t workers = std::min<size_t>(static_cast<size_t>(threads), count);
    const size_t chunk = (count + workers - 1) / workers;
    std::vector<T> parts(workers, zero);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t t = 0; t < workers; ++t) {
        const size_t lo = t * chunk;
        const size_t hi = std::min(count, lo + chunk);
        pool.emplace_back([&, t, lo, hi] {
            try {
                if (lo < hi) parts[t] = chunk_fn(lo, hi);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    T total = zero;
    for (auto& p : parts) total += p;
    return total;
}

}  // namespace fsi
