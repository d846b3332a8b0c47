#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace thermoscope {

// Worker cap: THERMOSCOPE_THREADS if set, otherwise machine parallelism.
inline int worker_count() {
    static const int n = [] {
        if (const char* env = std::getenv("THERMOSCOPE_THREADS")) {
            const int v = std::atoi(env);
            if (v > 0) return v;
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? static_cast<int>(hw) : 1;
    }();
    return n;
}

// Runs fn(worker, i) for i in [0, n) on up to n_workers threads. Work is
// claimed via an atomic counter so the partition never matters for
// correctness; callers that need determinism must write to disjoint slots
// indexed by i (never by worker).
inline void parallel_for_indexed(int n, int n_workers, const std::function<void(int, int)>& fn) {
    const int workers = std::min({worker_count(), n_workers, n});
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(0, i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&fn, &next, n, w] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(w, i);
        });
    }
    for (auto& t : threads) t.join();
}

inline void parallel_for(int n, const std::function<void(int)>& fn) {
    parallel_for_indexed(n, n, [&fn](int, int i) { fn(i); });
}

}  // namespace thermoscope
