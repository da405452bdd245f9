#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace amink {

// Worker count: explicit request > AMINK_THREADS env > hardware concurrency.
inline int resolve_threads(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("AMINK_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Static chunking over [0, count). fn(begin, end) must be safe to run
// concurrently on disjoint ranges; callers own any reduction.
template <typename Fn>
void parallel_chunks(int64_t count, int threads, Fn&& fn) {
    threads = static_cast<int>(std::max<int64_t>(1, std::min<int64_t>(threads, count)));
    if (threads <= 1 || count <= 1) {
        if (count > 0) fn(int64_t{0}, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    int64_t chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        int64_t b = t * chunk;
        int64_t e = std::min(count, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace amink
